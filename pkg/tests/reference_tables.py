"""Published 8-task result matrices (sequential, replay, and dual-memory
runs) with known average-accuracy and backward-transfer values; used as fixed
oracles for the metric pipeline."""

SEQUENTIAL_MATRIX = [
    [0.418, 0.323, 0.091, 0.316, 0.099, 0.373, 0.250, 0.280],
    [0.218, 0.603, 0.091, 0.216, 0.049, 0.370, 0.226, 0.256],
    [0.194, 0.494, 0.247, 0.048, 0.086, 0.384, 0.244, 0.238],
    [0.320, 0.262, 0.148, 0.368, 0.000, 0.367, 0.226, 0.238],
    [0.256, 0.204, 0.057, 0.244, 0.333, 0.370, 0.162, 0.252],
    [0.002, 0.012, 0.087, 0.158, 0.148, 0.414, 0.222, 0.144],
    [0.326, 0.246, 0.083, 0.292, 0.160, 0.396, 0.290, 0.278],
    [0.164, 0.258, 0.093, 0.096, 0.123, 0.390, 0.260, 0.296],
]
SEQUENTIAL_BWT8 = -0.184
SEQUENTIAL_ACC8 = 0.210

REPLAY_MATRIX = [
    [0.408, 0.359, 0.086, 0.180, 0.049, 0.372, 0.254, 0.302],
    [0.268, 0.645, 0.073, 0.090, 0.037, 0.371, 0.238, 0.238],
    [0.294, 0.373, 0.252, 0.050, 0.049, 0.378, 0.216, 0.222],
    [0.322, 0.250, 0.122, 0.480, 0.025, 0.375, 0.202, 0.274],
    [0.044, 0.135, 0.048, 0.340, 0.370, 0.377, 0.206, 0.244],
    [0.112, 0.010, 0.121, 0.154, 0.185, 0.411, 0.234, 0.226],
    [0.092, 0.280, 0.111, 0.232, 0.185, 0.392, 0.306, 0.228],
    [0.210, 0.292, 0.123, 0.238, 0.173, 0.389, 0.262, 0.268],
]
REPLAY_BWT8 = -0.169
REPLAY_ACC8 = 0.244

DUAL_MEMORY_MATRIX = [
    [0.444, 0.357, 0.066, 0.122, 0.111, 0.374, 0.254, 0.292],
    [0.432, 0.645, 0.066, 0.100, 0.074, 0.370, 0.236, 0.266],
    [0.184, 0.522, 0.213, 0.260, 0.074, 0.384, 0.244, 0.236],
    [0.354, 0.510, 0.192, 0.542, 0.025, 0.378, 0.214, 0.226],
    [0.358, 0.438, 0.147, 0.448, 0.296, 0.383, 0.196, 0.268],
    [0.336, 0.081, 0.144, 0.442, 0.222, 0.414, 0.244, 0.206],
    [0.430, 0.611, 0.213, 0.496, 0.235, 0.411, 0.270, 0.290],
    [0.430, 0.601, 0.216, 0.486, 0.222, 0.402, 0.276, 0.272],
]
DUAL_MEMORY_BWT8 = -0.027
DUAL_MEMORY_ACC8 = 0.363
