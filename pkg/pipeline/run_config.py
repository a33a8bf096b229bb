import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

from benchmark.results import Method
from ensembles.evolution import EvoConfig
from ensembles.greedy import GesConfig
from predictions.config import ARCHIVE_BINS, HAES_JOBS, HAES_OUTPUT_DIR, HAES_SEEDS


@dataclass
class RunConfig:
    repos: List[str]
    methods: List[str] = field(default_factory=lambda: [m.value for m in Method])
    seeds: List[int] = field(default_factory=lambda: list(range(HAES_SEEDS)))
    ges: GesConfig = field(default_factory=GesConfig)
    evo: EvoConfig = field(default_factory=EvoConfig)
    bins: int = ARCHIVE_BINS
    output_dir: str = HAES_OUTPUT_DIR
    jobs: int = HAES_JOBS
    resume: bool = False
    fail_fast: bool = False

    def __post_init__(self):
        if not self.repos:
            raise ValueError("at least one repo path is required")
        if not self.methods:
            raise ValueError("at least one method is required")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        self.methods = [Method.parse(m).value for m in self.methods]
        if len(set(self.methods)) != len(self.methods):
            raise ValueError(f"methods listed twice: {self.methods}")
        if any(s < 0 for s in self.seeds):
            raise ValueError(f"seeds must be nonnegative, got {self.seeds}")
        if self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")
        if self.jobs == 0:
            raise ValueError("jobs must be nonzero (negative values count back from all cores)")

    @property
    def results_dir(self) -> Path:
        return Path(self.output_dir)


def load_run_config_file(path) -> Dict[str, Any]:
    """
    Read a JSON run-config file into RunConfig keyword arguments. Nested "ges"
    and "evo" objects become GesConfig / EvoConfig.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Run config not found: {path}")
    values = json.loads(path.read_text())
    unknown = set(values) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"{path}: unknown run config keys {sorted(unknown)}")
    if "ges" in values:
        values["ges"] = GesConfig(**values["ges"])
    if "evo" in values:
        values["evo"] = EvoConfig(**values["evo"])
    return values
