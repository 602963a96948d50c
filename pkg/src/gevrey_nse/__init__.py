"""Pseudo-spectral Navier-Stokes on the periodic box with Gevrey-Sobolev diagnostics."""

__version__ = "0.1.0"
