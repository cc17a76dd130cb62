"""Hardy-space estimates on the annulus and Robin coefficient stability."""

__version__ = "0.1.0"

from .boundary import BoundaryArc, BoundaryGrid  # noqa: E402
from .kernel import AnnulusGeometry, KernelConstants, compute_Cs  # noqa: E402
from .laurent import LaurentFunction  # noqa: E402

__all__ = ["AnnulusGeometry", "BoundaryArc", "BoundaryGrid", "KernelConstants", "LaurentFunction",
           "compute_Cs", "__version__"]
