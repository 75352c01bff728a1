"""Quantum thermodynamics of repeated interactions.

Submodules
----------
operators
    States, partial traces, entropies, Gibbs states.
generators
    Lindblad superoperators, thermal generators, propagation.
repeated_interaction
    Interval ledgers, stroboscopic steady states, feedback, audits.
effective_me
    Effective master equations for kicked systems and their rate ledgers.
models
    Worked models: information ratchet, micromaser, lasing without
    inversion, electronic Maxwell demon.
cli
    Command-line runner for JSON scenarios.
"""

__version__ = "0.1.0"
