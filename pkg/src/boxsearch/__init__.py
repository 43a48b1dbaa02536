"""Sequential social learning with optimal Pandora-box search.

A simulation engine for societies of agents who search a shared item pool
with Weitzman-index policies, plus the closed-form bounds and stochastic
oracles used to validate the engine against theory.
"""
from __future__ import annotations

__version__ = "0.1.0"
