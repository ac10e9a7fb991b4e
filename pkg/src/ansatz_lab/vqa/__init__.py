"""Observables, problem encoders and the energy-minimization harness."""
