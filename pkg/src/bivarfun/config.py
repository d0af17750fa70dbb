"""Central tolerance and size configuration.

Every numerical threshold used across the package lives here so that a
single record can be embedded in reports and overridden from a config
file or command-line flags.
"""

import configparser
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

#: Crouzeix-Palencia constant.
K_CP = 1.0 + np.sqrt(2.0)


@dataclass(frozen=True)
class Config:
    tol_eig: float = 1e-10
    tol_solve: float = 1e-12
    tol_norm: float = 1e-10
    tol_cert: float = 1e-6
    # eigenvector matrices with larger condition estimates are not used
    max_eigvec_cond: float = 1e8
    # cap on n_A * n_B (and on Kronecker factor dimensions in general)
    max_kron_size: int = 4096
    n_angles: int = 360
    n_angles_cert: int = 720
    nodes: int = 256
    adaptive: bool = True
    rel_tol: float = 1e-10
    max_nodes: int = 4096
    dd_threshold: float = 1e-6
    probe_cap: float = 1e12
    n_probe: int = 16
    seed: int = 0

    def as_dict(self):
        return asdict(self)


DEFAULT = Config()


def _coerce(kind, text):
    if kind is bool:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    return kind(text.strip())


def load_config(text, base=DEFAULT):
    """Parse ``key = value`` lines (``#`` comments allowed) over ``base``.

    Unknown keys raise ``KeyError``.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[bivarfun]\n" + text)
    types = {f.name: type(getattr(base, f.name)) for f in fields(base)}
    updates = {}
    for key, value in parser["bivarfun"].items():
        if key not in types:
            raise KeyError(f"unknown configuration key {key!r}")
        updates[key] = _coerce(types[key], value)
    return replace(base, **updates)
