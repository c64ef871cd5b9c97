# minleaf 🍃 minimal hypersurface lab, GPL-3.0 license
"""
utils: numerical kernels, checks and run plumbing of minleaf
"""
