"""Branin as an external objective: one JSON request per line in, one float out."""
import json
import math
import sys

B = 5.1 / (4 * math.pi ** 2)
C = 5 / math.pi
T = 1 / (8 * math.pi)

for line in sys.stdin:
    x1, x2 = json.loads(line)["x"]
    y = (x2 - B * x1 * x1 + C * x1 - 6) ** 2 + 10 * (1 - T) * math.cos(x1) + 10
    print(repr(y), flush=True)
