"""
Modèles de données des documents machine (sortie --json).
"""

from typing import Any, Dict, List, Optional, Union
from pydantic import BaseModel, ConfigDict, Field, field_serializer


class CensusEntry(BaseModel):
    """Nombre de tuiles d'une forme."""

    tile: str = Field(description="Forme de tuile, ex: 24x9")
    count: int = Field(ge=0, description="Nombre d'invocations")


class PaperClaim(BaseModel):
    """Chiffre affirmé par la source, confronté au chiffre calculé."""

    metric: str = Field(description="Métrique concernée")
    paper_claim: Union[int, float] = Field(description="Valeur affirmée")
    computed: Union[int, float] = Field(description="Valeur calculée par le modèle")
    agrees: bool = Field(description="Les deux valeurs concordent")
    quote: str = Field(default="", description="Passage d'origine")

    @field_serializer("computed")
    def _round_computed(self, value: Union[int, float]) -> Union[int, float]:
        return round(value, 4) if isinstance(value, float) else value


class ResourceReport(BaseModel):
    """Comptabilité de ressources d'un plan sur un jeu de tuiles."""

    plan: str = Field(description="Nom du plan (p24, p57, p114, generic)")
    tileset: str = Field(description="Jeu de tuiles")
    a_width: int = Field(description="Largeur vraie de A")
    b_width: int = Field(description="Largeur vraie de B")
    a_padded: int = Field(description="Largeur bourrée de A")
    b_padded: int = Field(description="Largeur bourrée de B")
    census: List[CensusEntry] = Field(default_factory=list, description="Recensement des tuiles")
    total_tiles: int = Field(description="Somme du recensement")
    capacity_bitproducts: int = Field(description="Somme des w*h")
    useful_bitproducts: int = Field(description="Produits de bits significatifs")
    utilization: float = Field(gt=0, le=1, description="useful / capacity")
    underutilized_tiles: int = Field(ge=0, description="Étapes d'occupation < 1")
    underutilized_fraction: float = Field(ge=0, le=1, description="underutilized / total")
    paper_claims: List[PaperClaim] = Field(
        default_factory=list,
        description="Chiffres de la source pour ces largeurs et ce jeu"
    )

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "plan": "generic",
                "tileset": "BASELINE_18",
                "a_width": 113,
                "b_width": 113,
                "a_padded": 126,
                "b_padded": 126,
                "census": [{"tile": "18x18", "count": 49}],
                "total_tiles": 49,
                "capacity_bitproducts": 15876,
                "useful_bitproducts": 12769,
                "utilization": 0.8043,
                "underutilized_tiles": 13,
                "underutilized_fraction": 0.2653,
                "paper_claims": [
                    {"metric": "underutilized_tiles", "paper_claim": 17,
                     "computed": 13, "agrees": False}
                ]
            }
        }
    )

    @field_serializer("utilization", "underutilized_fraction")
    def _round4(self, value: float) -> float:
        return round(value, 4)

    def census_line(self) -> str:
        return " ".join(f"{entry.tile}:{entry.count}" for entry in self.census)


class ComparisonRow(BaseModel):
    """Une ligne de comparaison : un rapport ou une erreur de planification."""

    tileset: str
    report: Optional[ResourceReport] = None
    error: Optional[str] = None

    @classmethod
    def from_error(cls, tileset: str, error_message: str) -> "ComparisonRow":
        """Crée une ligne d'erreur."""
        return cls(tileset=tileset, error=error_message)


class Comparison(BaseModel):
    """Tableau comparatif trié par capacité."""

    a_width: int
    b_width: int
    rows: List[ComparisonRow] = Field(default_factory=list)


class SliceModel(BaseModel):
    operand: str
    low: int
    len: int


class StepModel(BaseModel):
    a_slice: int
    b_slice: int
    tile: str
    shift: int
    group: int = 0


class PlanDocument(BaseModel):
    """Forme structurée d'un plan de partition."""

    name: str
    tileset: str
    a_width: int
    b_width: int
    a_padded: int
    b_padded: int
    product_width: int
    a_slices: List[SliceModel]
    b_slices: List[SliceModel]
    steps: List[StepModel]
    census: Dict[str, int]

    @classmethod
    def from_plan_dict(cls, data: Dict[str, Any]) -> "PlanDocument":
        return cls(**data)


class MulResult(BaseModel):
    """Résultat d'une multiplication flottante."""

    format: str
    a: str
    b: str
    rounding: str
    result: str = Field(description="Motif hexadécimal du résultat")
    flags: List[str] = Field(default_factory=list)
    report: Optional[ResourceReport] = None


class IntMulResult(BaseModel):
    """Résultat d'une multiplication entière."""

    width: int
    tileset: str
    a: str
    b: str
    product: str
    report: Optional[ResourceReport] = None


class SuiteResult(BaseModel):
    """Bilan d'une suite du self-test."""

    suite: str
    status: str
    vectors: int = 0
    mismatches: int = 0
    duration: float = Field(default=0.0, description="Durée de la suite en secondes")
    error: Optional[str] = Field(default=None, description="Raison du saut ou exception levée")
    first_failure: Optional[Dict[str, str]] = None


class SelfTestSummary(BaseModel):
    """Bilan complet du self-test."""

    seed: int
    samples: int
    passed: bool
    suites: List[SuiteResult] = Field(default_factory=list)
    total_vectors: int = 0
    duration: float = 0.0
    warning: Optional[str] = None
