from .kernels import BesselPoly, PoleSet, ExpSumKernel, DrudeKernel
from .run_status import RunStatus
