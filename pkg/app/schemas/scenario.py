"""
Schémas de scénario: onde incidente, cape de Drude, discrétisation, coupe XY
"""

from typing import List, Literal

from pydantic import BaseModel, Field, field_validator, model_validator


class IncidentParams(BaseModel):
    """Onde plane D = (0, 0, F(x, t)) se propageant selon +x"""

    type: Literal["monochromatic", "pulse"] = "monochromatic"
    k: float = Field(40.0, gt=0)
    omega: float = Field(40.0, gt=0)
    A: float = 1.0
    tc: float = 4.0
    q: float = Field(0.5, gt=0)


class DrudeParams(BaseModel):
    """Couche de cape sphérique R1 < r < R2 à dispersion de Drude"""

    enabled: bool = True
    omega_c: float = Field(40.0, gt=0)
    gamma1: float = 0.001
    gamma2: float = 0.001
    R1: float = Field(0.15, gt=0)
    R2: float = Field(0.35, gt=0)

    @field_validator("gamma1", "gamma2")
    @classmethod
    def check_loss(cls, value: float) -> float:
        if value == 0:
            raise ValueError("Le cas sans pertes (gamma = 0) n'est pas supporté")
        return value

    @model_validator(mode="after")
    def check_radii(self):
        if self.R1 >= self.R2:
            raise ValueError(f"Il faut R1 < R2, reçu R1={self.R1}, R2={self.R2}")
        return self

    @property
    def epsilon_t(self) -> float:
        """Paramètre transverse ε = R2/(R2−R1), 1 quand la cape est désactivée"""
        if not self.enabled:
            return 1.0
        return self.R2 / (self.R2 - self.R1)

    def gamma(self, k: int) -> float:
        if k not in (1, 2):
            raise ValueError(f"Indice de milieu inconnu: {k} (attendu 1 ou 2)")
        return self.gamma1 if k == 1 else self.gamma2


# Alias utilisé par le fichier de scénario (clés cloak.*)
CloakParams = DrudeParams


class NewmarkParams(BaseModel):
    gamma: float = 0.5
    beta: float = 0.25
    dt: float = Field(1e-3, gt=0)

    @model_validator(mode="after")
    def check_stability(self):
        if self.gamma < 0.5:
            raise ValueError(f"Newmark instable: gamma={self.gamma} < 1/2")
        if self.beta < (0.5 + self.gamma) ** 2 / 4:
            raise ValueError(
                f"Newmark instable: beta={self.beta} < (1/2 + gamma)^2/4 = {(0.5 + self.gamma) ** 2 / 4}"
            )
        return self


class DiscretizationParams(BaseModel):
    E: int = Field(20, ge=4)
    N: int = Field(20, ge=1)
    L: int = Field(40, ge=1)
    dt: float = Field(1e-3, gt=0)
    t_end: float = Field(11.0, gt=0)
    gamma: float = 0.5
    beta: float = 0.25
    b: float = Field(1.0, gt=0)
    R3: float = Field(0.95, gt=0)
    c: float = Field(1.0, gt=0)
    chunk: int = Field(500, ge=1)
    diag_every: int = Field(100, ge=1)

    @model_validator(mode="after")
    def check_radius(self):
        if self.R3 >= self.b:
            raise ValueError(f"Il faut R3 < b, reçu R3={self.R3}, b={self.b}")
        return self

    @property
    def newmark(self) -> NewmarkParams:
        return NewmarkParams(gamma=self.gamma, beta=self.beta, dt=self.dt)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


class SliceParams(BaseModel):
    """Grille cartésienne n×n sur [−extent, extent]² dans le plan z = 0"""

    extent: float = Field(1.0, gt=0)
    n: int = Field(201, ge=0)
    full: bool = False


class Scenario(BaseModel):
    incident: IncidentParams = IncidentParams()
    cloak: DrudeParams = DrudeParams()
    disc: DiscretizationParams = DiscretizationParams()
    snapshots: List[float] = [9.0, 11.0]
    slice: SliceParams = SliceParams()

    @model_validator(mode="after")
    def check_geometry(self):
        if self.cloak.enabled and self.cloak.R2 >= self.disc.R3:
            raise ValueError(f"La cape doit être intérieure à R3: R2={self.cloak.R2}, R3={self.disc.R3}")
        for time in self.snapshots:
            if time < 0 or time > self.disc.t_end:
                raise ValueError(f"Instant de snapshot {time} hors de [0, {self.disc.t_end}]")
        return self

    def flat(self) -> dict:
        """Configuration résolue à plat (clés du fichier de scénario)"""
        values = {}
        for section in ("incident", "cloak", "disc", "slice"):
            for key, value in getattr(self, section).model_dump().items():
                values[f"{section}.{key}"] = value
        values["snapshots"] = list(self.snapshots)
        return values
