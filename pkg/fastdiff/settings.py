'''
Module-level defaults for the extinction laboratory.

These should be changed by the user *before* building solvers; the command
line runner overrides them from the scenario config.
'''

# zonal discretisation
L = 64
n_quad = 160

# flow solver
dt = 2e-3
tau_end = 10.0
output_every = 10
stepper = 'RK4'
positivity_floor = 1e-14
stability_factor = 1.0
calibrate = True
abort_degenerate = False
calibration_iterations = 4

# nearest bubble projection
trust_radius = 0.5
lambda_scan = (0.125, 8.0, 49)
projection_xtol = 1e-14

# bounded domain
M = 512
K = 256
domain_dt = 1e-2
domain_stepper = 'ROS2'
newton_tol = 1e-12
newton_maxiter = 50

# diagnostics
fit_drop_start = 0.25
fit_drop_end = 0.05
rate_tolerance = 0.05
linear_rate_tolerance = 1e-10
bounded_rate_tolerance = 0.10
amplitude_floor = 1e-12

# batch mode thread limit
THREADS_ENV = 'FASTDIFF_THREADS'
