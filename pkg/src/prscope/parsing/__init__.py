from ._yaml_data_models import (
    ConfigCircuit,
    ConfigRun,
    load_circuit,
    load_run_config,
    read_run_values,
)

__all__ = [
    "ConfigCircuit",
    "ConfigRun",
    "load_circuit",
    "load_run_config",
    "read_run_values",
]
