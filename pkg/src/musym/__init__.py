"""Standard and mu-symmetries of PDE systems on jet space.

Modules: expr (expressions, normal forms, zero tests), jet (jet coordinates,
total derivatives, oriented systems), vfield (prolongations), muform
(horizontal forms, compatibility, gauge maps), symcheck (symmetry verdicts),
reduce (ansatz reduction), oracle (numeric checks), problem and cli.
"""

__version__ = "0.1.0"
