"""
Test suite for the secrecy outage toolkit.

- test_installation.py: Dependencies, package and a first computed point
- test_params.py: Parameter validation, config files and dB conversion
- test_mathkit.py: Special functions and quadrature
- test_analytic.py: Analytic SOP evaluators, bounds and the approximation
- test_simcore.py: Monte Carlo simulator
- test_harness.py: Sweeps, trend checks, crossover search, CSV and recipes
- test_cli.py: analyze_sop command line
"""
