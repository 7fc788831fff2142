"""Differential fuzzer for context-dependent RPC divergences.

Pipeline: build execution contexts on an in-process test chain via
coverage-guided transaction mutation, generate typed RPC calls against
context snapshots, dispatch them to one reference client plus
fault-injected variants, and compare normalized responses for divergences.
"""

__version__ = "0.1.0"
