"""Run configurations and the built-in example setups."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from ..mesh import DomainSpec

# time steps are exact dyadic values: 0.015625 = 2^-6 for I-III, 0.03125 = 2^-5
# for IV (the latter two are sometimes quoted rounded as 0.0156 and 0.0312)
EXAMPLES = {
    "I": dict(domain="disk:10", n_cells=2000, dt=2.0**-6, T=500.0, p=2.0,
              initial="example1_ic", damping="example1"),
    "II": dict(domain="disk:10", n_cells=2000, dt=2.0**-6, T=500.0, p=2.0,
               initial="example1_ic", damping="example2"),
    "III": dict(domain="annulus:5,20", n_cells=5000, dt=2.0**-6, T=500.0, p=2.0,
                initial="example3_ic", damping="example3"),
    "IV": dict(domain="annulus:7,20", n_cells=5000, dt=2.0**-5, T=10000.0, p=2.0,
               initial="example3_ic", damping="example4"),
    "custom": dict(domain="disk:10", n_cells=500, dt=2.0**-6, T=10.0, p=2.0,
                   initial="example1_ic", damping="zero"),
}

# (n_cells, T) used for quick runs
REDUCED = {"I": (500, 100.0), "II": (500, 100.0), "III": (1000, 200.0), "IV": (1000, 200.0)}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one simulation run.

    ``fit_window`` defaults to ``(0.1 T, T)``. ``mesh_file`` replaces mesh
    generation; ``save_mesh`` writes the mesh used.
    """

    example: str = "I"
    domain: str = "disk:10"
    n_cells: int = 2000
    dt: float = 2.0**-6
    T: float = 500.0
    p: float = 2.0
    seed: int = 0
    record_every: int = 1
    snapshot_every: int | None = None
    initial: str = "example1_ic"
    damping: str = "example1"
    damping_amplitude: float = 1.0
    picard_tol: float = 1e-6
    picard_max_iters: int = 100
    krylov_tol: float = 1e-10
    krylov_restart: int = 50
    krylov_max_iters: int = 5000
    nonlinearity: bool = True
    jacobi: bool = False
    fit_window: tuple | None = None
    lloyd_max_iters: int = 200
    mesh_file: str | None = None
    save_mesh: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ValueError(f"unknown example {self.example!r}; choose from {sorted(EXAMPLES)}")
        DomainSpec.parse(self.domain)
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        if not (self.dt > 0 and self.T >= self.dt):
            raise ValueError("need dt > 0 and T >= dt")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.fit_window is not None:
            a, b = self.fit_window
            if not a < b:
                raise ValueError("fit window must satisfy a < b")

    @classmethod
    def for_example(cls, example="I", reduced=False, **overrides):
        if example not in EXAMPLES:
            raise ValueError(f"unknown example {example!r}; choose from {sorted(EXAMPLES)}")
        base = dict(EXAMPLES[example])
        if reduced and example in REDUCED:
            base["n_cells"], base["T"] = REDUCED[example]
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(example=example, **base)

    @property
    def domain_spec(self):
        return DomainSpec.parse(self.domain)

    @property
    def window(self):
        return tuple(self.fit_window) if self.fit_window else (0.1 * self.T, self.T)

    def scheme_config(self):
        from ..solver import SchemeConfig

        return SchemeConfig(
            dt=self.dt,
            p=self.p,
            picard_tol=self.picard_tol,
            picard_max_iters=self.picard_max_iters,
            krylov_tol=self.krylov_tol,
            krylov_restart=self.krylov_restart,
            krylov_max_iters=self.krylov_max_iters,
            nonlinearity_enabled=self.nonlinearity,
            jacobi=self.jacobi,
        )

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        d["fit_window"] = list(self.window)
        return d
