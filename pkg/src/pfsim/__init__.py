"""Monte Carlo simulator and analysis toolkit for 3D Potts / random-cluster
interfaces above hard and soft floors."""

__version__ = "0.1.0"
