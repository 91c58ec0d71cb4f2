"""Domain core: grids, operators, noise, time stepping and long-time analysis."""
