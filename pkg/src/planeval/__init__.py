"""Benchmark engine for evaluating chat agents as planners, verifiers and comparative heuristics."""

__version__ = "0.1.0"
