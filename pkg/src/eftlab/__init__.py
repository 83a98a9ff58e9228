"""eftlab: exact q-series, SL2(Z) checks and toy field-theory realizations of modular functions."""

from .gaussian import GaussRat
from .qseries import CycInt, QSeries, qs_add, qs_inv, qs_mul, t_transform
from .modforms import ModularFunctionSpec, eval_mf_spec, j_function, delta, eta
from .moduli import SL2Z, SpinStructure, act_spin, spin_orbits
from .realization import TheoryData, SpinTheoryData, build_from_series, partition
from .bordism import Atom, BordWord, normalize, evaluate
from .susy import BlockModel, build_pair, partition_qexp
from .clifford import sector_series, periodicity_certificate

__version__ = "0.1.0"

__all__ = [
    "GaussRat", "CycInt", "QSeries", "qs_add", "qs_inv", "qs_mul", "t_transform",
    "ModularFunctionSpec", "eval_mf_spec", "j_function", "delta", "eta",
    "SL2Z", "SpinStructure", "act_spin", "spin_orbits",
    "TheoryData", "SpinTheoryData", "build_from_series", "partition",
    "Atom", "BordWord", "normalize", "evaluate",
    "BlockModel", "build_pair", "partition_qexp",
    "sector_series", "periodicity_certificate",
]
