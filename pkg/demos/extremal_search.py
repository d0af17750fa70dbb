"""
Searching for large ratios
==========================

Hill climbing on ||f{A,B}|| / max |f| over W(A) x W(B) for f = xy.  The
Jordan pair seeds the search with ratio 4; restricting to normal matrices
the ratio never exceeds 1.
"""

from bivarfun import extremal_search, parse

f = parse("x*y", 2)
board = extremal_search(f, sizes=(2, 3), iterations=300, seed=0)
print("unrestricted leaderboard:", [round(e["raw_ratio"], 6) for e in board])

board = extremal_search(f, sizes=(2, 3), iterations=300, seed=0, restrict_normal=True)
print("normal-only leaderboard: ", [round(e["raw_ratio"], 6) for e in board])
