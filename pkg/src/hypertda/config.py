from __future__ import annotations

from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = "1.0"


@dataclass
class RunConfig:
    """Every knob of a run; echoed verbatim into each output's metadata."""

    inputs: list = field(default_factory=list)
    policy: str = "reduction"
    max_scale: float | None = None
    density_radius: float = 2.0
    p_norm: float = 10.0
    tol: float = 1e-8
    max_iter: int = 1000
    seed: int = 0
    resolution: float = 1.0
    flatten_weight: str = "count"
    interpolate_to: int | None = None
    sigmas: list = field(default_factory=lambda: [0.05, 0.1, 0.15, 0.2])
    include_smooth: bool = True
    smooth_window: int = 3
    smooth_passes: int = 5
    time_as_z: bool = False
    time_step: float = 1.0
    ami_drop_singletons: bool = False
    out_dir: str = "out"
    jobs: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inputs"] = [str(p) for p in self.inputs]
        d["sigmas"] = [float(s) for s in self.sigmas]
        return d

    def metadata(self, command: str) -> dict:
        return {"schema_version": SCHEMA_VERSION, "command": command, "config": self.to_dict()}
