"""Distributed tasks as sequential objects: task complexes, set/get object
synthesis, valid-history enumeration, linearizability and a model checker
for grid renaming."""

from .complexes import Complex, Task, Vertex, closure, simplex, validate_task
from .histories import Event, enumerate_VE_task, satisfies_task
from .linearizability import (
    check_bijection,
    enumerate_VE_obj,
    linearizable,
    sequentializable_single_op,
)
from .objects import (
    adhoc_exchanger_object,
    adhoc_splitter_object,
    complete_wrt_task,
    correct_wrt_task,
    generic_setget_object,
    objects_equivalent,
    theorem1_object,
)
from .renaming import check_rw_splitter, model_check_renaming
from .tasks import (
    adaptive_renaming_task,
    builtin_task,
    exchanger_task,
    k_set_agreement_task,
    splitter_task,
    test_and_set_task,
)

__version__ = "0.1.0"

__all__ = [
    "Complex", "Event", "Task", "Vertex", "adaptive_renaming_task", "adhoc_exchanger_object",
    "adhoc_splitter_object", "builtin_task", "check_bijection", "check_rw_splitter", "closure",
    "complete_wrt_task", "correct_wrt_task", "enumerate_VE_obj", "enumerate_VE_task",
    "exchanger_task", "generic_setget_object", "k_set_agreement_task", "linearizable",
    "model_check_renaming", "objects_equivalent", "satisfies_task", "sequentializable_single_op",
    "simplex", "splitter_task", "test_and_set_task", "theorem1_object", "validate_task",
]
