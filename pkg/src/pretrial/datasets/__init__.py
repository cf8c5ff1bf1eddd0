"""Case-record data model, CSV ingestion, and synthetic populations."""

from .io import (
    dataset_to_csv,
    infer_schema,
    load_schema,
    parse_dataset,
    save_schema,
    write_dataset,
)
from .records import (
    OUTCOME_NAMES,
    CaseRecord,
    DatasetSchema,
    DatasetSummary,
    FeatureSpec,
    filter_training_eligible,
    schema_from_dict,
    schema_to_dict,
    split,
    summarize,
)
from .synth import (
    POPULATION_SCHEMA,
    Distribution,
    GroupSpec,
    PopulationSpec,
    load_population_spec,
    population_from_dict,
    synthesize_population,
)

__all__ = [
    "OUTCOME_NAMES",
    "POPULATION_SCHEMA",
    "CaseRecord",
    "DatasetSchema",
    "DatasetSummary",
    "Distribution",
    "FeatureSpec",
    "GroupSpec",
    "PopulationSpec",
    "dataset_to_csv",
    "filter_training_eligible",
    "infer_schema",
    "load_population_spec",
    "load_schema",
    "parse_dataset",
    "population_from_dict",
    "save_schema",
    "schema_from_dict",
    "schema_to_dict",
    "split",
    "summarize",
    "synthesize_population",
    "write_dataset",
]
