"""
Occupancy table of the distance-32, Delta=2 half-grid transfer graph.

Row n0 lists the occupancies of nodes (n0, n2) for n2 = 0 .. 16 - n0.
The table is a transcription; FIG6_TOTAL guards it.
"""

FIG6_HALF_DISTANCE = 16

FIG6_TOTAL = 680913

FIG6_OCCUPANCIES = (
    (4, 4, 30, 35, 455, 273, 2002, 715, 1430, 715, 2002, 273, 455, 140, 120, 16, 1),
    (4, 60, 105, 455, 1365, 3003, 5005, 715, 715, 5005, 3003, 1365, 1820, 420, 240, 16),
    (30, 105, 2730, 2730, 30030, 15015, 10010, 715, 10010, 15015, 30030, 2730, 2730, 420, 120),
    (35, 455, 2730, 10010, 1001, 5005, 15015, 15015, 5005, 1001, 10010, 2730, 1820, 140),
    (455, 1365, 30030, 1001, 1001, 10010, 2145, 10010, 1001, 1001, 30030, 1365, 455),
    (273, 3003, 15015, 5005, 10010, 286, 286, 10010, 5005, 15015, 3003, 273),
    (2002, 5005, 10010, 15015, 2145, 286, 2145, 15015, 10010, 5005, 2002),
    (715, 715, 715, 15015, 10010, 10010, 15015, 715, 715, 715),
    (1430, 715, 10010, 5005, 1001, 5005, 10010, 715, 1430),
    (715, 5005, 15015, 1001, 1001, 15015, 5005, 715),
    (2002, 3003, 30030, 10010, 30030, 3003, 2002),
    (273, 1365, 2730, 2730, 1365, 273),
    (455, 1820, 2730, 1820, 455),
    (140, 420, 420, 140),
    (120, 240, 120),
    (16, 16),
    (1,),
)
