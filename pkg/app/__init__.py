"""
Noyaux NRBC exacts pour Maxwell sur une sphère et simulateur de la cape sphérique dispersive
"""

__version__ = "1.0.0"
