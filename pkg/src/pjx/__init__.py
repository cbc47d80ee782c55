"""Exact solutions, blow-up analysis and regularity classification for
u_xt + u u_xx - lambda u_x^2 = -(lambda + 1) int u_x^2 dx on [0, 1]."""

__version__ = "0.1.0"
