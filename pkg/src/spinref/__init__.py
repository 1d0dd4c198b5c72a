"""spinref: classical simulation of bulk-spin ensemble computing.

A cyclic-tape reversible machine with a head-carried register, pulse-driven
polymer ring architectures, thermal bit-string sources, the three-phase
algorithmic-cooling pipeline that turns weakly biased bits into a clean
prefix, compilers from the abstract phases to machine primitives, and the
closed-form analysis (recurrences, bounds, yield ledger) that drives and
certifies all of it.
"""

from . import analysis, compiler, cooling, machine, perms, polymer, reports, thermal

__all__ = [
    "analysis",
    "compiler",
    "cooling",
    "machine",
    "perms",
    "polymer",
    "reports",
    "thermal",
]

__version__ = "0.1.0"
