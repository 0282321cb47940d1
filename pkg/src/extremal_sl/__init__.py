"""extremal-sl – least Neumann Sturm-Liouville eigenvalue over the unit sphere of L_gamma potentials."""

__version__ = "0.1.0"
