"""lerwlab: simulation laboratory for the high-dimensional loop-erased random
walk and the continuous-time random walk on its trace."""

__version__ = "0.1.0"
