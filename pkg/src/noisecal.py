"""
Extração da temperatura de ruído pelo método do atenuador frio.

Usa combinação de:
- Fator Y a partir dos estados quente/frio da fonte de ruído (ENR)
- Modelo de cabo com gradiente térmico (ponto médio ou distribuído)
- De-embed da cadeia de entrada e do backend para isolar o Te do DUT
"""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from config.settings import MIN_DUT_GAIN_DB, T0_KELVIN
from src.errors import (
    BackendDominatedWarning,
    CryoChainError,
    ExtrapolationError,
    InputChainGainWarning,
    NoExcessNoiseError,
    NonphysicalMeasurementError,
    OvercorrectedDeembedError,
    ValidationError,
)
from src.rfnet import (
    CableModel,
    FrequencyGrid,
    SignalChain,
    cascade_noise,
    db_to_linear,
)

logger = logging.getLogger(__name__)


def thot_from_enr(enr_db: float) -> float:
    """T_hot = 290 * (1 + 10^(ENR/10)); ENR -> -inf dá 290 K."""
    return T0_KELVIN * (1.0 + 10.0 ** (enr_db / 10.0))


@dataclass(frozen=True)
class EnrTable:
    """
    Calibração de ENR da fonte de ruído em função da frequência.

    Interpolação linear em dB entre os pontos da tabela; fora da faixa
    usa o valor da borda, como as tabelas impressas nas fontes comerciais.
    """
    freq_hz: tuple
    enr_db: tuple

    def __post_init__(self):
        if len(self.freq_hz) != len(self.enr_db) or not self.freq_hz:
            raise ValidationError("Tabela de ENR vazia ou com tamanhos diferentes")
        FrequencyGrid(np.asarray(self.freq_hz, dtype=float))
        object.__setattr__(self, "freq_hz", tuple(float(f) for f in self.freq_hz))
        object.__setattr__(self, "enr_db", tuple(float(e) for e in self.enr_db))

    def enr_at(self, f_hz: float) -> float:
        return float(np.interp(f_hz, self.freq_hz, self.enr_db))


@dataclass(frozen=True)
class NoiseSourceSpec:
    """
    Fonte de ruído: t_hot direto, ENR escalar ou tabela de ENR.

    Args:
        t_cold: Temperatura física no estado desligado
        t_hot: Temperatura no estado ligado (se conhecida)
        enr_db: ENR escalar em dB (com T0 = 290 K)
        enr_table: ENR em função da frequência
    """
    t_cold: float
    t_hot: float | None = None
    enr_db: float | None = None
    enr_table: EnrTable | None = None

    def __post_init__(self):
        given = [x is not None for x in (self.t_hot, self.enr_db, self.enr_table)]
        if sum(given) != 1:
            raise ValidationError("Informe exatamente um de t_hot, enr_db ou enr_table")
        if self.t_cold < 0:
            raise ValidationError(f"t_cold deve ser >= 0 (recebido {self.t_cold})")
        if self.enr_table is None and not self.hot_temperature() > self.t_cold:
            raise ValidationError("t_hot deve ser maior que t_cold")

    def hot_temperature(self, f_hz: float | None = None) -> float:
        if self.t_hot is not None:
            return float(self.t_hot)
        if self.enr_db is not None:
            return thot_from_enr(self.enr_db)
        if f_hz is None:
            raise ValidationError("Tabela de ENR exige a frequência")
        return thot_from_enr(self.enr_table.enr_at(f_hz))


def y_from_powers(p_hot: float, p_cold: float) -> float:
    """Reduz potências brutas (W) ao fator Y."""
    if not (p_hot > 0 and p_cold > 0):
        raise ValidationError(f"Potências devem ser > 0 (p_hot={p_hot}, p_cold={p_cold})")
    return p_hot / p_cold


@dataclass(frozen=True)
class NoiseMeasurement:
    """Medição Y num plano de referência; aceita Y ou (p_hot, p_cold)."""
    source: NoiseSourceSpec
    y: float | None = None
    p_hot: float | None = None
    p_cold: float | None = None
    freq_hz: float | None = None
    reference_plane: str = "source"

    def __post_init__(self):
        if self.y is None:
            if self.p_hot is None or self.p_cold is None:
                raise ValidationError("Informe y ou o par (p_hot, p_cold)")
            object.__setattr__(self, "y", y_from_powers(self.p_hot, self.p_cold))


def forward_y(te: float, t_hot: float, t_cold: float) -> float:
    """Modelo direto: Y = (T_hot + Te) / (T_cold + Te)."""
    return (t_hot + te) / (t_cold + te)


def y_factor_te(m: NoiseMeasurement) -> float:
    """
    Temperatura de ruído do sistema no plano de referência.

    Te = (T_hot - Y*T_cold) / (Y - 1)

    Raises:
        NoExcessNoiseError: Y <= 1
        NonphysicalMeasurementError: resultado negativo
    """
    y = m.y
    if not y > 1:
        raise NoExcessNoiseError(y)
    t_hot = m.source.hot_temperature(m.freq_hz)
    te = (t_hot - y * m.source.t_cold) / (y - 1.0)
    if te < 0:
        raise NonphysicalMeasurementError(te)
    return te


# --- Cabo com gradiente térmico ---

def cable_effective_te(
    loss_db: float,
    t_in: float,
    t_out: float,
    model: CableModel | None = None,
) -> float:
    """
    Te referido à entrada de um cabo com perda atravessando um gradiente.

    Args:
        loss_db: Perda total
        t_in: Temperatura física na entrada
        t_out: Temperatura física na saída
        model: 'midpoint' usa (L-1)*t_mid; 'distributed' divide em n
            segmentos de mesmo dB com temperatura linear na posição e
            faz a cascata de Friis

    Returns:
        Temperatura em kelvin
    """
    model = model or CableModel()
    for name, value in (("loss_db", loss_db), ("t_in", t_in), ("t_out", t_out)):
        if value < 0:
            raise ValidationError(f"{name} deve ser >= 0 (recebido {value})")
    return model.effective_te(loss_db, t_in, t_out)


# --- De-embed ---

@dataclass(frozen=True)
class DeembedContext:
    """
    Contexto do de-embed.

    Args:
        input_chain: Elementos entre o plano da fonte e a entrada do DUT
        backend_te: Te do backend (pós-DUT) em kelvin
        dut_gain_db: Ganho do DUT (escalar) ou None para usar dut_gain_table
        dut_gain_table: (freq_hz, gain_db) do ganho medido do DUT
    """
    input_chain: SignalChain | None
    backend_te: float
    dut_gain_db: float | None = None
    dut_gain_table: tuple | None = None

    def __post_init__(self):
        if self.backend_te < 0:
            raise ValidationError(f"backend_te deve ser >= 0 (recebido {self.backend_te})")
        if (self.dut_gain_db is None) == (self.dut_gain_table is None):
            raise ValidationError("Informe exatamente um de dut_gain_db ou dut_gain_table")
        if self.dut_gain_table is not None:
            freqs, gains = (np.asarray(x, dtype=float) for x in self.dut_gain_table)
            if freqs.shape != gains.shape:
                raise ValidationError("dut_gain_table com tamanhos diferentes")
            object.__setattr__(self, "dut_gain_table", (FrequencyGrid(freqs), gains))

    def dut_gain(self, f_hz: float) -> float:
        if self.dut_gain_db is not None:
            return float(db_to_linear(self.dut_gain_db))
        grid, gains = self.dut_gain_table
        outside = FrequencyGrid(np.array([f_hz])).outside_of(grid)
        if outside.size:
            raise ExtrapolationError(outside)
        return float(db_to_linear(np.interp(f_hz, grid.points, gains)))

    def input_terms(self, f_hz: float) -> tuple[float, float]:
        """(Te_in, G_in) da cadeia de entrada em f_hz."""
        if self.input_chain is None:
            return 0.0, 1.0
        report = cascade_noise(self.input_chain, FrequencyGrid(np.array([f_hz])))
        return float(report.te_input_referred[0]), float(report.gain_linear[0])


@dataclass(frozen=True)
class DeembedResult:
    te_dut: float
    te_sys: float
    te_in: float
    g_in: float
    g_dut: float
    backend_term: float
    backend_sensitivity: float
    warnings: tuple = field(default_factory=tuple)


def system_te_at_source(te_dut: float, ctx: DeembedContext, f_hz: float) -> float:
    """Modelo direto: Te_sys = Te_in + Te_DUT/G_in + Te_backend/(G_in*G_DUT)."""
    te_in, g_in = ctx.input_terms(f_hz)
    g_dut = ctx.dut_gain(f_hz)
    return te_in + te_dut / g_in + ctx.backend_te / (g_in * g_dut)


def deembed_dut_te(te_sys_at_source_plane: float, ctx: DeembedContext, grid_point: float) -> DeembedResult:
    """
    Isola o Te do DUT a partir do Te do sistema no plano da fonte.

    Te_DUT = G_in*(Te_sys - Te_in) - Te_backend/G_DUT

    Raises:
        OvercorrectedDeembedError: Te_DUT negativo
    """
    te_in, g_in = ctx.input_terms(grid_point)
    g_dut = ctx.dut_gain(grid_point)
    if not (g_in > 0 and g_dut > 0):
        raise ValidationError(f"Ganhos devem ser > 0 (G_in={g_in}, G_DUT={g_dut})")

    raised = []
    if g_in > 1:
        warnings.warn(
            f"Cadeia de entrada com ganho {10 * math.log10(g_in):.3g} dB em {grid_point:.6g} Hz",
            InputChainGainWarning,
            stacklevel=2,
        )
        raised.append(InputChainGainWarning.reason)
    if 10 * math.log10(g_dut) < MIN_DUT_GAIN_DB:
        warnings.warn(
            f"Extração dominada pelo backend: G_DUT = {10 * math.log10(g_dut):.3g} dB",
            BackendDominatedWarning,
            stacklevel=2,
        )
        raised.append(BackendDominatedWarning.reason)

    backend_term = ctx.backend_te / g_dut
    te_dut = g_in * (te_sys_at_source_plane - te_in) - backend_term
    if te_dut < 0:
        raise OvercorrectedDeembedError(te_dut, {
            "te_sys": te_sys_at_source_plane,
            "te_in": te_in,
            "g_in": g_in,
            "backend_term": backend_term,
        })
    return DeembedResult(
        te_dut=te_dut,
        te_sys=te_sys_at_source_plane,
        te_in=te_in,
        g_in=g_in,
        g_dut=g_dut,
        backend_term=backend_term,
        backend_sensitivity=-1.0 / g_dut,
        warnings=tuple(raised),
    )


@dataclass(frozen=True)
class DeembedRow:
    """Linha do resultado por frequência; `reason` preenchido quando falha."""
    freq_hz: float
    te_sys: float | None = None
    result: DeembedResult | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.result is not None


def _deembed_one(measurement: NoiseMeasurement, ctx: DeembedContext) -> DeembedRow:
    f = measurement.freq_hz
    try:
        te_sys = y_factor_te(measurement)
    except CryoChainError as e:
        return DeembedRow(f, reason=e.reason)
    try:
        return DeembedRow(f, te_sys, deembed_dut_te(te_sys, ctx, f))
    except CryoChainError as e:
        return DeembedRow(f, te_sys, reason=e.reason)


def deembed_over_grid(
    measurements: list[NoiseMeasurement],
    ctx: DeembedContext,
    workers: int = 1,
) -> list[DeembedRow]:
    """
    Aplica y_factor_te + deembed_dut_te em cada frequência.

    Pontos são independentes; com workers > 1 usa um pool de threads e o
    resultado é idêntico ao sequencial (mesma ordem, sem suavização).
    """
    if workers <= 1:
        rows = [_deembed_one(m, ctx) for m in measurements]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda m: _deembed_one(m, ctx), measurements))
    failed = sum(1 for r in rows if not r.ok)
    if failed:
        logger.warning("%d de %d pontos sem Te válido", failed, len(rows))
    return rows
