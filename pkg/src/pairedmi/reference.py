"""Published Monte Carlo rejection rates at (n1, n2, n3) = (10, 10, 10).

Each entry maps ``(law, rho)`` to two 5-tuples ordered as :data:`METHOD_ORDER`.
Type-I error table: first tuple ``sigma1``, second ``sigma2``; power table:
``sigma1``, first tuple ``delta = 0.5``, second ``delta = 1``. All values come
from 10,000 replicates.
"""

METHOD_ORDER = ('tml', 'rfmi', 'rfmice', 'pmm', 'norm')
REFERENCE_NSIM = 10_000

TYPE1 = {
    ("normal", -0.9): ((0.052, 0.07, 0.058, 0.061, 0.045), (0.056, 0.073, 0.063, 0.062, 0.047)),
    ("normal", -0.5): ((0.052, 0.118, 0.071, 0.061, 0.045), (0.054, 0.117, 0.073, 0.062, 0.045)),
    ("normal", -0.1): ((0.05, 0.163, 0.077, 0.055, 0.038), (0.054, 0.162, 0.077, 0.057, 0.042)),
    ("normal", 0.1): ((0.054, 0.201, 0.085, 0.055, 0.041), (0.064, 0.188, 0.085, 0.051, 0.041)),
    ("normal", 0.5): ((0.052, 0.26, 0.085, 0.048, 0.039), (0.052, 0.216, 0.078, 0.047, 0.04)),
    ("normal", 0.9): ((0.051, 0.302, 0.048, 0.036, 0.038), (0.058, 0.167, 0.054, 0.046, 0.042)),
    ("exp", -0.9): ((0.049, 0.07, 0.06, 0.059, 0.046), (0.074, 0.085, 0.075, 0.076, 0.058)),
    ("exp", -0.5): ((0.052, 0.118, 0.071, 0.058, 0.045), (0.074, 0.124, 0.078, 0.065, 0.051)),
    ("exp", -0.1): ((0.048, 0.165, 0.076, 0.052, 0.039), (0.077, 0.173, 0.088, 0.063, 0.045)),
    ("exp", 0.1): ((0.052, 0.195, 0.078, 0.05, 0.04), (0.083, 0.19, 0.091, 0.065, 0.052)),
    ("exp", 0.5): ((0.05, 0.262, 0.084, 0.048, 0.04), (0.084, 0.221, 0.092, 0.06, 0.056)),
    ("exp", 0.9): ((0.045, 0.295, 0.043, 0.034, 0.038), (0.097, 0.183, 0.065, 0.056, 0.049)),
    ("chisq", -0.9): ((0.049, 0.07, 0.06, 0.059, 0.046), (0.054, 0.073, 0.062, 0.061, 0.046)),
    ("chisq", -0.5): ((0.052, 0.118, 0.071, 0.058, 0.045), (0.055, 0.115, 0.073, 0.056, 0.041)),
    ("chisq", -0.1): ((0.048, 0.165, 0.076, 0.052, 0.039), (0.052, 0.167, 0.079, 0.055, 0.044)),
    ("chisq", 0.1): ((0.052, 0.195, 0.078, 0.05, 0.04), (0.054, 0.187, 0.081, 0.054, 0.042)),
    ("chisq", 0.5): ((0.05, 0.262, 0.084, 0.048, 0.04), (0.058, 0.219, 0.082, 0.057, 0.049)),
    ("chisq", 0.9): ((0.045, 0.295, 0.043, 0.034, 0.038), (0.062, 0.166, 0.053, 0.046, 0.039)),
    ("laplace", -0.9): ((0.05, 0.07, 0.06, 0.061, 0.045), (0.065, 0.076, 0.066, 0.066, 0.075)),
    ("laplace", -0.5): ((0.051, 0.108, 0.067, 0.054, 0.04), (0.065, 0.118, 0.077, 0.062, 0.047)),
    ("laplace", -0.1): ((0.05, 0.167, 0.077, 0.055, 0.04), (0.069, 0.17, 0.083, 0.061, 0.048)),
    ("laplace", 0.1): ((0.056, 0.194, 0.083, 0.05, 0.042), (0.069, 0.191, 0.083, 0.057, 0.046)),
    ("laplace", 0.5): ((0.052, 0.252, 0.082, 0.046, 0.046), (0.07, 0.217, 0.085, 0.053, 0.044)),
    ("laplace", 0.9): ((0.049, 0.278, 0.037, 0.031, 0.047), (0.09, 0.182, 0.061, 0.051, 0.049)),
}

POWER = {
    ("normal", -0.9): ((0.26, 0.315, 0.299, 0.3, 0.264), (0.733, 0.792, 0.78, 0.78, 0.747)),
    ("normal", -0.5): ((0.271, 0.396, 0.319, 0.284, 0.239), (0.768, 0.847, 0.803, 0.771, 0.719)),
    ("normal", -0.1): ((0.306, 0.477, 0.349, 0.29, 0.238), (0.832, 0.909, 0.846, 0.788, 0.734)),
    ("normal", 0.1): ((0.338, 0.551, 0.383, 0.306, 0.25), (0.858, 0.934, 0.869, 0.799, 0.729)),
    ("normal", 0.5): ((0.439, 0.703, 0.463, 0.345, 0.302), (0.947, 0.985, 0.924, 0.864, 0.805)),
    ("normal", 0.9): ((0.869, 0.967, 0.657, 0.605, 0.628), (1.0, 1.0, 0.973, 0.967, 0.957)),
    ("exp", -0.9): ((0.287, 0.332, 0.312, 0.315, 0.269), (0.777, 0.814, 0.8, 0.801, 0.76)),
    ("exp", -0.5): ((0.336, 0.435, 0.364, 0.318, 0.271), (0.818, 0.862, 0.825, 0.785, 0.742)),
    ("exp", -0.1): ((0.379, 0.516, 0.394, 0.328, 0.269), (0.863, 0.909, 0.857, 0.796, 0.745)),
    ("exp", 0.1): ((0.408, 0.57, 0.414, 0.332, 0.279), (0.888, 0.928, 0.861, 0.813, 0.756)),
    ("exp", 0.5): ((0.528, 0.727, 0.496, 0.38, 0.343), (0.952, 0.978, 0.918, 0.841, 0.81)),
    ("exp", 0.9): ((0.876, 0.95, 0.676, 0.617, 0.661), (1.0, 0.998, 0.968, 0.954, 0.958)),
    ("chisq", -0.9): ((0.255, 0.311, 0.29, 0.295, 0.254), (0.739, 0.796, 0.783, 0.784, 0.752)),
    ("chisq", -0.5): ((0.278, 0.391, 0.322, 0.287, 0.243), (0.776, 0.848, 0.81, 0.774, 0.729)),
    ("chisq", -0.1): ((0.315, 0.5, 0.367, 0.301, 0.248), (0.831, 0.905, 0.843, 0.786, 0.729)),
    ("chisq", 0.1): ((0.345, 0.55, 0.39, 0.308, 0.256), (0.874, 0.938, 0.873, 0.809, 0.748)),
    ("chisq", 0.5): ((0.442, 0.7, 0.448, 0.342, 0.304), (0.951, 0.985, 0.927, 0.856, 0.802)),
    ("chisq", 0.9): ((0.868, 0.966, 0.661, 0.61, 0.636), (1.0, 1.0, 0.97, 0.966, 0.957)),
    ("laplace", -0.9): ((0.287, 0.336, 0.315, 0.316, 0.27), (0.767, 0.812, 0.791, 0.792, 0.753)),
    ("laplace", -0.5): ((0.327, 0.421, 0.354, 0.317, 0.263), (0.814, 0.859, 0.822, 0.791, 0.739)),
    ("laplace", -0.1): ((0.367, 0.519, 0.385, 0.322, 0.267), (0.858, 0.908, 0.851, 0.798, 0.743)),
    ("laplace", 0.1): ((0.4, 0.572, 0.412, 0.336, 0.277), (0.889, 0.935, 0.874, 0.812, 0.754)),
    ("laplace", 0.5): ((0.504, 0.726, 0.497, 0.375, 0.342), (0.952, 0.979, 0.92, 0.846, 0.815)),
    ("laplace", 0.9): ((0.877, 0.95, 0.669, 0.614, 0.66), (1.0, 0.999, 0.971, 0.955, 0.959)),
}


def type1(law: str, rho: float, sigma: str, method: str) -> float:
    return TYPE1[(law, rho)][0 if sigma == "sigma1" else 1][METHOD_ORDER.index(method)]


def power(law: str, rho: float, delta: float, method: str) -> float:
    return POWER[(law, rho)][0 if delta == 0.5 else 1][METHOD_ORDER.index(method)]
