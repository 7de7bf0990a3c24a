# Library package for finite-group computations on direct powers:
# groups, strips, factorisations, cartesian factorisations, diagonal actions
__version__ = "0.1.0"
