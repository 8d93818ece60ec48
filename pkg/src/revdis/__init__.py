"""Quadratic optomechanics in the reversed dissipation regime.

Full Lindblad simulation of a cavity coupled to a strongly damped mechanical
oscillator, the closed-form effective cavity model obtained by eliminating
the mechanics, and linewidth-based thermometry built on top of both.
"""

__version__ = "0.1.0"
