"""Exception hierarchy.

Every error raised by the library derives from :class:`SymfactError`, which is
itself a :class:`ValueError` so callers validating input can catch broadly.
"""


class SymfactError(ValueError):
    pass


class NotUnitary(SymfactError):
    def __init__(self, defect, tol):
        self.defect = float(defect)
        self.tol = float(tol)
        super().__init__(f"matrix is not unitary: ||A*A - I|| = {defect:.3e} > {tol:.3e}")


class ConvergenceFailure(SymfactError):
    pass


class ShapeMismatch(SymfactError):
    pass


class SchemaError(SymfactError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class SpectrumNotConjSymmetric(SymfactError):
    """No conjugate partner exists for ``eigenvalue`` within the cluster tolerance."""

    def __init__(self, eigenvalue, margin):
        self.eigenvalue = complex(eigenvalue)
        self.margin = float(margin)
        super().__init__(
            f"spectrum is not closed under conjugation: eigenvalue {eigenvalue:.6g} "
            f"has no conjugate partner (nearest at distance {margin:.3e})"
        )


class NotIntertwiner(SymfactError):
    pass


class DeterminantObstruction(SymfactError):
    def __init__(self, det, distance):
        self.det = complex(det)
        self.distance = float(distance)
        super().__init__(f"det = {det:.6g} is at distance {distance:.3e} from {{+1, -1}}")


class MultiplicityConstraint(SymfactError):
    def __init__(self, eigenvalue, multiplicity, block_size):
        self.eigenvalue = complex(eigenvalue)
        self.multiplicity = int(multiplicity)
        self.block_size = int(block_size)
        super().__init__(
            f"eigenvalue {eigenvalue:.6g} has multiplicity {multiplicity}, "
            f"which is not a multiple of the minimal block size {block_size}"
        )


class NotFourthRoot(SymfactError):
    pass


class OddDimension(SymfactError):
    pass


class DimensionNotDivisible(SymfactError):
    pass


class RankMismatch(SymfactError):
    pass


class NotCommuting(SymfactError):
    pass
