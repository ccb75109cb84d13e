"""
Orçamento de potência do refrigerador de diluição e comparação de
topologias de polarização (alimentação direta vs multiplexação de corrente).
"""

import logging
import math
import warnings
from dataclasses import asdict, dataclass

from config.settings import DEFAULT_ALLOCATION_FRACTION
from src.errors import CurrentMismatchWarning, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageSpec:
    """Estágio térmico do refrigerador."""
    name: str
    temperature: float  # K
    cooling_power: float  # W
    allocation_fraction: float = DEFAULT_ALLOCATION_FRACTION

    def __post_init__(self):
        if not self.cooling_power > 0:
            raise ValidationError(f"cooling_power deve ser > 0 (recebido {self.cooling_power})")
        if not 0 < self.allocation_fraction <= 1:
            raise ValidationError(f"allocation_fraction fora de (0, 1]: {self.allocation_fraction}")
        if self.temperature < 0:
            raise ValidationError(f"temperature deve ser >= 0 (recebido {self.temperature})")

    @property
    def budget_w(self) -> float:
        return self.cooling_power * self.allocation_fraction


@dataclass(frozen=True)
class DeploymentSpec:
    n_qubits: int
    qubits_per_line: int
    p_lna: float  # W por LNA
    bias_lines_per_lna: int = 1

    def __post_init__(self):
        for name in ("n_qubits", "qubits_per_line", "bias_lines_per_lna"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ValidationError(f"{name} deve ser inteiro positivo (recebido {value!r})")
        if self.p_lna < 0:
            raise ValidationError(f"p_lna deve ser >= 0 (recebido {self.p_lna})")


@dataclass(frozen=True)
class BudgetReport:
    n_lines: int
    total_power_w: float
    budget_w: float
    utilization: float
    feasible: bool
    total_bias_lines: int
    stage: str = ""


def plan_budget(d: DeploymentSpec, s: StageSpec) -> BudgetReport:
    """
    Planeja quantas linhas de leitura cabem no estágio.

    n_lines = ceil(n_qubits / qubits_per_line); total = n_lines * p_lna;
    viável se total <= cooling_power * allocation_fraction.
    """
    n_lines = -(-d.n_qubits // d.qubits_per_line)
    total = n_lines * d.p_lna
    budget = s.budget_w
    # igualdade (a menos de arredondamento) conta como viável
    feasible = total <= budget or math.isclose(total, budget, rel_tol=1e-12)
    report = BudgetReport(
        n_lines=n_lines,
        total_power_w=total,
        budget_w=budget,
        utilization=total / budget,
        feasible=feasible,
        total_bias_lines=n_lines * d.bias_lines_per_lna,
        stage=s.name,
    )
    logger.debug("Orçamento %s: %.4g W de %.4g W", s.name, total, budget)
    return report


def max_lna_power(d: DeploymentSpec, s: StageSpec) -> float:
    """Maior dissipação por LNA que ainda cabe no orçamento."""
    n_lines = -(-d.n_qubits // d.qubits_per_line)
    return s.budget_w / n_lines


@dataclass(frozen=True)
class BiasTopology:
    """
    Topologia de polarização.

    Args:
        kind: "direct" ou "multiplexed"
        stages: Lista de (v_drop em V, i em A) por estágio
        rail_voltage: Tensão do trilho de alimentação
    """
    kind: str
    stages: tuple
    rail_voltage: float

    def __post_init__(self):
        if self.kind not in ("direct", "multiplexed"):
            raise ValidationError(f"Topologia desconhecida: {self.kind}")
        stages = tuple((float(v), float(i)) for v, i in self.stages)
        if not stages:
            raise ValidationError("Topologia sem estágios")
        if self.rail_voltage < 0 or any(v < 0 or i < 0 for v, i in stages):
            raise ValidationError("Tensões e correntes devem ser >= 0")
        object.__setattr__(self, "stages", stages)


def bias_power(t: BiasTopology) -> float:
    """
    Potência DC drenada do trilho.

    direct: cada estágio puxa sua corrente do trilho inteiro;
    multiplexed: estágios empilhados em série dividem uma única corrente.
    """
    currents = [i for _, i in t.stages]
    if t.kind == "direct":
        return sum(t.rail_voltage * i for i in currents)
    if max(currents) != min(currents):
        warnings.warn(
            f"Correntes diferentes entre estágios {currents}; usando a maior",
            CurrentMismatchWarning,
            stacklevel=2,
        )
    return t.rail_voltage * max(currents)


def bias_reduction(t: BiasTopology) -> float:
    """Razão direct/multiplexed para os mesmos estágios."""
    direct = bias_power(BiasTopology("direct", t.stages, t.rail_voltage))
    mux = bias_power(BiasTopology("multiplexed", t.stages, t.rail_voltage))
    if mux == 0:
        raise ValidationError("Potência multiplexada nula")
    return direct / mux


def budget_to_dict(report: BudgetReport, topology: BiasTopology | None = None) -> dict:
    """Árvore compatível com JSON do relatório."""
    data = asdict(report)
    if topology is not None:
        direct = bias_power(BiasTopology("direct", topology.stages, topology.rail_voltage))
        mux = bias_power(BiasTopology("multiplexed", topology.stages, topology.rail_voltage))
        data["bias_topology"] = {
            "kind": topology.kind,
            "n_stages": len(topology.stages),
            "rail_voltage": topology.rail_voltage,
            "power_w": bias_power(topology),
            "direct_power_w": direct,
            "multiplexed_power_w": mux,
            "reduction": direct / mux if mux else None,
        }
    return data


def format_budget_table(data: dict) -> str:
    """Tabela legível do relatório (mesmo layout dos relatórios do CLI)."""
    lines = [
        "=" * 50,
        f"ORCAMENTO DE POTENCIA - estagio {data.get('stage', '')}",
        "=" * 50,
        "",
        f"  Linhas de leitura:     {data['n_lines']}",
        f"  Linhas de bias:        {data['total_bias_lines']}",
        f"  Potencia total:        {data['total_power_w'] * 1e3:.4g} mW",
        f"  Orcamento:             {data['budget_w'] * 1e3:.4g} mW",
        f"  Utilizacao:            {data['utilization'] * 100:.1f}%",
        f"  Viavel:                {'SIM' if data['feasible'] else 'NAO'}",
    ]
    bias = data.get("bias_topology")
    if bias:
        lines += [
            "",
            "  POLARIZACAO:",
            f"    Direta:              {bias['direct_power_w'] * 1e3:.4g} mW",
            f"    Multiplexada:        {bias['multiplexed_power_w'] * 1e3:.4g} mW",
        ]
        if bias["reduction"]:
            lines.append(f"    Reducao:             {bias['reduction']:.2f}x")
    lines += ["", "=" * 50]
    return "\n".join(lines)
