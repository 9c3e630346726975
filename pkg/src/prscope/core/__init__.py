from .circuits import LayeredCircuit, LightconeReport, SchmidtAudit
from .ensembles import StateEnsemble, Unitary, UnitaryEnsemble
from .errors import DimensionError, DomainError, PrscopeError, ResourceError, StructuralError
from .experiments import DistinguisherResult, EntanglementReport, MarginalReport, ScalingReport
from .moments import BoundReport, FramePotentialEstimate, MomentOperator
from .statevec import DensityMatrix, StateVector, SubsystemMask

__all__ = [
    "BoundReport",
    "DensityMatrix",
    "DimensionError",
    "DistinguisherResult",
    "DomainError",
    "EntanglementReport",
    "FramePotentialEstimate",
    "LayeredCircuit",
    "LightconeReport",
    "MarginalReport",
    "MomentOperator",
    "PrscopeError",
    "ResourceError",
    "ScalingReport",
    "SchmidtAudit",
    "StateEnsemble",
    "StateVector",
    "StructuralError",
    "SubsystemMask",
    "Unitary",
    "UnitaryEnsemble",
]
