"""Search spaces, architecture codec, and net compilation."""
from .arch import (
    Architecture,
    CellArch,
    GraphArch,
    arch_from_choices,
    arch_from_string,
    arch_to_string,
    cell_depth,
    choices_from_arch,
    enumerate_archs,
    mutate,
    policy_blocks,
    random_arch,
    tokens,
    validate,
)
from .net import CompiledNet, compile_arch
from .space import (
    CELL201_OPS,
    GRAPH101_OPS,
    TOY_OPS,
    MacroConfig,
    SearchSpace,
    cell201,
    graph101,
    space_by_kind,
    toy_enum,
)

__all__ = [
    "Architecture",
    "CELL201_OPS",
    "CellArch",
    "CompiledNet",
    "GRAPH101_OPS",
    "GraphArch",
    "MacroConfig",
    "SearchSpace",
    "TOY_OPS",
    "arch_from_choices",
    "arch_from_string",
    "arch_to_string",
    "cell201",
    "cell_depth",
    "choices_from_arch",
    "compile_arch",
    "enumerate_archs",
    "graph101",
    "mutate",
    "policy_blocks",
    "random_arch",
    "space_by_kind",
    "tokens",
    "toy_enum",
    "validate",
]
