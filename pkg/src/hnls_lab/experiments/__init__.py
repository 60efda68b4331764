"""Experiment configs, result rows, verification suites and the run commands."""
