"""JSON file formats for characters and module matrices."""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator

from modvoa_core.field import FpMatrix
from modvoa_heisenberg.fock import Mode
from modvoa_heisenberg.heismod import HeisModule, ModuleInvariantError
from modvoa_heisenberg.quotient import LambdaSpec


class LambdaFile(BaseModel):
    """Characters lambda0 and lambda as stored on disk."""

    model_config = ConfigDict(populate_by_name=True)

    p: int = Field(..., description="Characteristic")
    dim: int = Field(..., ge=1, description="Dimension d of h")
    level: int = Field(default=1, description="Level l")
    lambda0: list[int] = Field(default_factory=list, description="Zero-mode character")
    entries: list[tuple[int, int, int]] = Field(
        default_factory=list, alias="lambda", description="Triples [gen, depth, value]"
    )

    @classmethod
    def from_spec(cls, spec: LambdaSpec, p: int, level: int = 1) -> "LambdaFile":
        return cls(
            p=p,
            dim=spec.d,
            level=level,
            lambda0=list(spec.lambda0),
            entries=[tuple(e) for e in spec.entries],
        )

    def to_spec(self) -> LambdaSpec:
        values = {(g, n): v for g, n, v in self.entries}
        if len(values) != len(self.entries):
            raise ValueError("duplicate lambda entries")
        return LambdaSpec.from_entries(self.dim, values, self.p, self.lambda0 or None)


class ActionEntry(BaseModel):
    """The matrix of one mode u_gen(deg)."""

    gen: int = Field(..., ge=1)
    deg: int
    matrix: list[list[int]]


class HeisModuleFile(BaseModel):
    """A finite-dimensional Heisenberg module as stored on disk."""

    p: int
    dim_h: int = Field(..., ge=1, description="Dimension d of h")
    level: int
    gram: list[int] = Field(..., description="Diagonal of the gram matrix")
    mode_window: int = Field(default=0, ge=0)
    basis_size: int = Field(..., ge=1)
    actions: list[ActionEntry] = Field(default_factory=list)
    central: LambdaFile | None = None

    @model_validator(mode="after")
    def _shapes(self) -> "HeisModuleFile":
        for entry in self.actions:
            rows = entry.matrix
            if len(rows) != self.basis_size or any(len(r) != self.basis_size for r in rows):
                raise ValueError(
                    f"u{entry.gen}({entry.deg}) needs a {self.basis_size}x{self.basis_size} matrix"
                )
        return self

    @classmethod
    def from_module(cls, module: HeisModule) -> "HeisModuleFile":
        return cls(
            p=module.p,
            dim_h=module.d,
            level=module.level,
            gram=list(module.gram),
            mode_window=module.mode_window,
            basis_size=module.dim,
            actions=[
                ActionEntry(gen=m.gen, deg=m.deg, matrix=a.to_rows())
                for m, a in module.actions.items()
            ],
            central=(
                LambdaFile.from_spec(module.central, module.p, module.level)
                if module.central is not None
                else None
            ),
        )

    def to_module(self) -> HeisModule:
        actions: dict[Mode, FpMatrix] = {}
        for entry in self.actions:
            mode = Mode(entry.gen, entry.deg)
            if mode in actions:
                raise ModuleInvariantError(f"{mode} is declared twice")
            actions[mode] = FpMatrix.from_rows(entry.matrix, self.p)
        return HeisModule(
            self.p,
            self.dim_h,
            self.level,
            tuple(self.gram),
            self.basis_size,
            actions,
            self.mode_window,
            self.central.to_spec() if self.central else None,
        )


def load_lambda(path: Path) -> LambdaFile:
    return LambdaFile.model_validate_json(path.read_text())


def save_lambda(path: Path, data: LambdaFile) -> None:
    path.write_text(data.model_dump_json(by_alias=True, indent=2) + "\n")


def load_module(path: Path) -> HeisModule:
    return HeisModuleFile.model_validate_json(path.read_text()).to_module()


def save_module(path: Path, module: HeisModule) -> None:
    path.write_text(HeisModuleFile.from_module(module).model_dump_json(indent=2) + "\n")
