from ._core import (
    Program,
    builtin_layouts,
    compile_program,
    diagnose,
    feature_schema,
    grammar,
    rollout,
    run_search,
    schema_digest,
    train_eval,
)

__all__ = [
    "Program",
    "builtin_layouts",
    "compile_program",
    "diagnose",
    "feature_schema",
    "grammar",
    "rollout",
    "run_search",
    "schema_digest",
    "train_eval",
]
