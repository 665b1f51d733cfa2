"""ising_lab: complex-temperature Ising partition functions from layered
quantum circuits, analytic continuation back to real temperatures, and the
derived applications (knot invariants, circuit-amplitude reconstruction,
fidelity overlaps, corner-magnetization approximation schemes)."""

__version__ = "0.1.0"
