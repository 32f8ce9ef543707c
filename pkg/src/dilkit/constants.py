import math

C0 = 299792458.0  # m/s
MU0 = 1.25663706212e-6  # H/m, CODATA 2018
ETA0 = MU0 * C0  # ohm

NP_TO_DB = 20.0 / math.log(10.0)

# WR05 broad-wall width; also the default DIL width
WR05_A = 1.2954e-3
