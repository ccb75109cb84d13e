"""
Álgebra de redes de duas portas para a cadeia de leitura.

Funcionalidades:
- Grade de frequências e registros de parâmetros S (2x2 complexos)
- Cascata de parâmetros S (via matriz T) e conversão ABCD
- Elementos de cadeia (atenuador, amplificador, cabo, arquivo .s2p)
- Cascata de ruído estilo Friis, tudo referido à entrada
- Conversões NF <-> Te com T0 = 290 K
"""

import logging
import os
from dataclasses import dataclass, field

import numpy as np
from skrf.network import a2s, s2a, s2t, t2s

from config.settings import DEFAULT_CABLE_SEGMENTS, DEFAULT_Z_REF, PASSIVITY_TOLERANCE, T0_KELVIN
from src.errors import (
    ConfigError,
    CryoChainError,
    DomainError,
    ExtrapolationError,
    GridError,
    InfiniteReferredNoiseError,
    SingularNetworkError,
    ValidationError,
)

logger = logging.getLogger(__name__)

_LN10_OVER_10 = np.log(10.0) / 10.0


# --- Conversões escalares ---

def _check_nonnegative(value, name: str):
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} deve ser >= 0 (recebido {value})")
    return arr


def te_from_nf(nf_db):
    """
    Converte figura de ruído (dB) em temperatura equivalente de ruído (K).

    Te = T0 * (10^(NF/10) - 1), com T0 = 290 K.

    Args:
        nf_db: Figura de ruído em dB (escalar ou array)

    Returns:
        Temperatura de ruído em kelvin
    """
    nf = _check_nonnegative(nf_db, "nf_db")
    te = T0_KELVIN * np.expm1(nf * _LN10_OVER_10)
    return float(te) if te.ndim == 0 else te


def nf_from_te(te):
    """Inverso de te_from_nf: NF = 10*log10(1 + Te/290)."""
    t = _check_nonnegative(te, "te")
    nf = np.log1p(t / T0_KELVIN) / _LN10_OVER_10
    return float(nf) if nf.ndim == 0 else nf


def attenuator_te(loss_db, t_phys):
    """
    Temperatura de ruído referida à entrada de um atenuador casado.

    Te = (L - 1) * t_phys, com L = 10^(loss_db/10).
    """
    loss = _check_nonnegative(loss_db, "loss_db")
    t = _check_nonnegative(t_phys, "t_phys")
    te = np.expm1(loss * _LN10_OVER_10) * t
    return float(te) if te.ndim == 0 else te


def db_to_linear(gain_db):
    """Ganho de potência em dB -> razão linear."""
    return np.power(10.0, np.asarray(gain_db, dtype=float) / 10.0)


# --- Grade de frequências ---

@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Pontos de frequência em Hz, estritamente crescentes e positivos."""
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise ValidationError("Grade de frequências vazia")
        if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
            raise ValidationError("Frequências devem ser finitas e > 0")
        if np.any(np.diff(pts) <= 0):
            raise ValidationError("Frequências devem ser estritamente crescentes")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def linspace(cls, f_start: float, f_stop: float, n: int) -> "FrequencyGrid":
        if n == 1:
            return cls(np.array([f_start], dtype=float))
        return cls(np.linspace(f_start, f_stop, n))

    def __len__(self) -> int:
        return self.points.size

    def same_as(self, other: "FrequencyGrid") -> bool:
        return len(self) == len(other) and np.array_equal(self.points, other.points)

    def outside_of(self, other: "FrequencyGrid", rtol: float = 1e-12) -> np.ndarray:
        """Pontos desta grade que caem fora da faixa de `other`."""
        lo = other.points[0] * (1 - rtol)
        hi = other.points[-1] * (1 + rtol)
        return self.points[(self.points < lo) | (self.points > hi)]


# --- Registros de parâmetros S ---

@dataclass(frozen=True, eq=False)
class TwoPortRecord:
    """
    Parâmetros S 2x2 amostrados em frequência.

    `s` tem formato (n, 2, 2): s[:, 0, 0] = S11, s[:, 0, 1] = S12,
    s[:, 1, 0] = S21, s[:, 1, 1] = S22.
    """
    grid: FrequencyGrid
    s: np.ndarray
    z_ref: float = DEFAULT_Z_REF
    passive: bool = False

    def __post_init__(self):
        s = np.array(self.s, dtype=complex)
        if s.shape != (len(self.grid), 2, 2):
            raise ValidationError(
                f"Matriz S com formato {s.shape}, esperado ({len(self.grid)}, 2, 2)"
            )
        if not np.all(np.isfinite(s)):
            raise ValidationError("Parâmetros S não finitos")
        if not self.z_ref > 0:
            raise ValidationError(f"z_ref deve ser > 0 (recebido {self.z_ref})")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)
        if self.passive:
            product = np.abs(s[:, 1, 0]) * np.abs(s[:, 0, 1])
            bad = np.nonzero(product > 1 + PASSIVITY_TOLERANCE)[0]
            if bad.size:
                f = self.grid.points[bad[0]]
                raise ValidationError(f"Elemento passivo com |S21|·|S12| > 1 em {f:.9g} Hz")

    @property
    def s11(self) -> np.ndarray:
        return self.s[:, 0, 0]

    @property
    def s12(self) -> np.ndarray:
        return self.s[:, 0, 1]

    @property
    def s21(self) -> np.ndarray:
        return self.s[:, 1, 0]

    @property
    def s22(self) -> np.ndarray:
        return self.s[:, 1, 1]

    def gain_linear(self) -> np.ndarray:
        """Ganho de potência |S21|^2 (hipótese de carga casada)."""
        return np.abs(self.s21) ** 2


def twoport_from_gain(
    grid: FrequencyGrid,
    gain_db: float,
    z_ref: float = DEFAULT_Z_REF,
    reciprocal: bool = False,
) -> TwoPortRecord:
    """
    Duas portas casado com ganho constante.

    Args:
        grid: Grade de frequências
        gain_db: Ganho (negativo para perda)
        z_ref: Impedância de referência
        reciprocal: Se True, S12 = S21 (atenuadores, cabos); senão S12 = 0
    """
    amp = 10.0 ** (gain_db / 20.0)
    s = np.zeros((len(grid), 2, 2), dtype=complex)
    s[:, 1, 0] = amp
    if reciprocal:
        s[:, 0, 1] = amp
    return TwoPortRecord(grid, s, z_ref, passive=reciprocal and gain_db <= 0)


# --- Conversões de parâmetros ---

def _first_zero(values: np.ndarray, grid: FrequencyGrid | None):
    zero = np.nonzero(values == 0)[0]
    if zero.size:
        f = grid.points[zero[0]] if grid is not None else float(zero[0])
        raise SingularNetworkError(f)


def sparams_to_t(s: np.ndarray, grid: FrequencyGrid | None = None) -> np.ndarray:
    """
    S -> T (matriz de cascata do scikit-rf), de modo que T_total = T_A @ T_B.

    Raises:
        SingularNetworkError: S21 = 0, com a frequência do primeiro ponto
    """
    _first_zero(s[:, 1, 0], grid)
    return s2t(np.asarray(s, dtype=complex))


def t_to_sparams(t: np.ndarray, grid: FrequencyGrid | None = None) -> np.ndarray:
    # T22 = 1/S21 nessa convenção
    _first_zero(t[:, 1, 1], grid)
    return t2s(np.asarray(t, dtype=complex))


def sparams_to_abcd(s: np.ndarray, z0: float, grid: FrequencyGrid | None = None) -> np.ndarray:
    _first_zero(s[:, 1, 0], grid)
    return s2a(np.asarray(s, dtype=complex), z0)


def abcd_to_sparams(abcd: np.ndarray, z0: float) -> np.ndarray:
    return a2s(np.asarray(abcd, dtype=complex), z0)


def cascade_sparams(a: TwoPortRecord, b: TwoPortRecord) -> TwoPortRecord:
    """
    Cascata de duas redes (a seguida de b) pela matriz de transferência T.

    Raises:
        GridError: grades ou z_ref diferentes (reamostre antes)
        SingularNetworkError: S21 = 0 em alguma frequência
    """
    if not a.grid.same_as(b.grid):
        raise GridError("Grades diferentes na cascata; use resample() antes")
    if a.z_ref != b.z_ref:
        raise GridError(f"z_ref diferente na cascata ({a.z_ref} vs {b.z_ref})")
    t = sparams_to_t(a.s, a.grid) @ sparams_to_t(b.s, b.grid)
    return TwoPortRecord(a.grid, t_to_sparams(t, a.grid), a.z_ref)


def cascade_sparams_abcd(a: TwoPortRecord, b: TwoPortRecord) -> TwoPortRecord:
    """Mesma cascata pelo caminho ABCD (usado como verificação independente)."""
    if not a.grid.same_as(b.grid) or a.z_ref != b.z_ref:
        raise GridError("Grades ou z_ref diferentes na cascata")
    abcd = sparams_to_abcd(a.s, a.z_ref, a.grid) @ sparams_to_abcd(b.s, b.z_ref, b.grid)
    return TwoPortRecord(a.grid, abcd_to_sparams(abcd, a.z_ref), a.z_ref)


def resample(record: TwoPortRecord, grid: FrequencyGrid) -> TwoPortRecord:
    """
    Reamostra um registro numa nova grade.

    Interpolação linear em magnitude e fase desembrulhada, independente
    para cada entrada S. Extrapolação é proibida.
    """
    if record.grid.same_as(grid):
        return record
    outside = grid.outside_of(record.grid)
    if outside.size:
        raise ExtrapolationError(outside)

    src = record.grid.points
    dst = np.clip(grid.points, src[0], src[-1])
    out = np.empty((len(grid), 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            entry = record.s[:, i, j]
            mag = np.interp(dst, src, np.abs(entry))
            phase = np.interp(dst, src, np.unwrap(np.angle(entry)))
            out[:, i, j] = mag * np.exp(1j * phase)
    return TwoPortRecord(grid, out, record.z_ref)


def return_loss_db(record: TwoPortRecord, port: int = 1) -> np.ndarray:
    """20*log10|S11| (port=1) ou 20*log10|S22| (port=2) por frequência."""
    if port not in (1, 2):
        raise ValidationError(f"Porta inválida: {port}")
    entry = record.s11 if port == 1 else record.s22
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(entry))


# --- Elementos da cadeia ---

@dataclass(frozen=True)
class Attenuator:
    label: str
    loss_db: float
    t_phys: float

    def __post_init__(self):
        _check_element(self.label, loss_db=self.loss_db, t_phys=self.t_phys)

    def gain_linear(self, grid: FrequencyGrid) -> np.ndarray:
        return np.full(len(grid), db_to_linear(-self.loss_db))

    def noise_temperature(self, grid: FrequencyGrid) -> np.ndarray:
        return np.full(len(grid), attenuator_te(self.loss_db, self.t_phys))


@dataclass(frozen=True)
class Amplifier:
    """Amplificador com ganho escalar (dB) ou medido (TwoPortRecord)."""
    label: str
    gain: float | TwoPortRecord
    te: float

    def __post_init__(self):
        _check_element(self.label, te=self.te)

    def gain_linear(self, grid: FrequencyGrid) -> np.ndarray:
        if isinstance(self.gain, TwoPortRecord):
            return resample(self.gain, grid).gain_linear()
        return np.full(len(grid), db_to_linear(self.gain))

    def noise_temperature(self, grid: FrequencyGrid) -> np.ndarray:
        return np.full(len(grid), float(self.te))


@dataclass(frozen=True)
class CableModel:
    """Modelo térmico do cabo: 'midpoint' (com t_mid) ou 'distributed' (n_segments)."""
    kind: str = "distributed"
    t_mid: float | None = None
    n_segments: int | None = None

    def __post_init__(self):
        if self.kind not in ("midpoint", "distributed"):
            raise ValidationError(f"Modelo de cabo desconhecido: {self.kind}")
        if self.kind == "midpoint" and (self.t_mid is None or self.t_mid < 0):
            raise ValidationError("Modelo 'midpoint' exige t_mid >= 0")
        if self.n_segments is not None and self.n_segments < 1:
            raise ValidationError("n_segments deve ser >= 1")

    def effective_te(self, loss_db: float, t_in: float, t_out: float) -> float:
        """
        Te referido à entrada de um cabo com perda loss_db entre t_in e t_out.

        'midpoint' usa (L-1)*t_mid; 'distributed' divide em n segmentos de
        mesmo dB com temperatura linear na posição e faz a cascata de Friis.
        """
        if loss_db == 0:
            return 0.0
        if self.kind == "midpoint":
            return attenuator_te(loss_db, self.t_mid)

        n = self.n_segments or DEFAULT_CABLE_SEGMENTS
        seg_loss_db = loss_db / n
        seg_gain = 10.0 ** (-seg_loss_db / 10.0)
        seg_factor = np.expm1(seg_loss_db * _LN10_OVER_10)
        # temperatura no centro de cada segmento
        positions = (np.arange(n) + 0.5) / n
        t_seg = t_in + (t_out - t_in) * positions
        referred = seg_factor * t_seg / seg_gain ** np.arange(n)
        return float(np.sum(referred))


@dataclass(frozen=True)
class Cable:
    label: str
    loss_db: float
    t_in: float
    t_out: float
    model: CableModel = field(default_factory=CableModel)

    def __post_init__(self):
        _check_element(self.label, loss_db=self.loss_db, t_in=self.t_in, t_out=self.t_out)

    def gain_linear(self, grid: FrequencyGrid) -> np.ndarray:
        return np.full(len(grid), db_to_linear(-self.loss_db))

    def noise_temperature(self, grid: FrequencyGrid) -> np.ndarray:
        te = self.model.effective_te(self.loss_db, self.t_in, self.t_out)
        return np.full(len(grid), te)


@dataclass(frozen=True)
class SParamElement:
    """
    Elemento vindo de arquivo .s2p.

    O ruído é `te` constante, ou uma tabela (freq_hz, te_k) derivada do
    bloco de parâmetros de ruído do arquivo (Fmin convertido com te_from_nf).
    """
    label: str
    record: TwoPortRecord
    te: float = 0.0
    te_table: tuple | None = None

    def __post_init__(self):
        _check_element(self.label, te=self.te)

    def gain_linear(self, grid: FrequencyGrid) -> np.ndarray:
        return resample(self.record, grid).gain_linear()

    def noise_temperature(self, grid: FrequencyGrid) -> np.ndarray:
        if self.te_table is None:
            return np.full(len(grid), float(self.te))
        freqs, temps = (np.asarray(x, dtype=float) for x in self.te_table)
        outside = grid.outside_of(FrequencyGrid(freqs))
        if outside.size:
            raise ExtrapolationError(outside)
        return np.interp(grid.points, freqs, temps)


ChainElement = Attenuator | Amplifier | Cable | SParamElement


def _check_element(label: str, **values):
    if not label:
        raise ValidationError("Elemento sem label")
    for name, value in values.items():
        if value is None or not np.isfinite(value) or value < 0:
            raise ValidationError(f"Elemento '{label}': {name} deve ser >= 0 (recebido {value})")


@dataclass(frozen=True)
class SignalChain:
    """Cascata ordenada de elementos, entrada primeiro."""
    elements: tuple

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise ValidationError("Cadeia vazia")
        labels = [e.label for e in elements]
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        if dupes:
            raise ValidationError(f"Labels repetidos na cadeia: {', '.join(dupes)}")
        object.__setattr__(self, "elements", elements)

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.elements]

    def __add__(self, other: "SignalChain") -> "SignalChain":
        return SignalChain(self.elements + other.elements)


@dataclass(frozen=True, eq=False)
class ChainReport:
    grid: FrequencyGrid
    cumulative_gain_db: np.ndarray
    te_input_referred: np.ndarray
    per_element_contribution: dict

    @property
    def gain_linear(self) -> np.ndarray:
        return db_to_linear(self.cumulative_gain_db)


def cascade_noise(chain: SignalChain, grid: FrequencyGrid) -> ChainReport:
    """
    Cascata de ruído (Friis), referida à entrada da cadeia.

    Te_total = sum_i Te_i / prod_{j<i} G_j

    Raises:
        InfiniteReferredNoiseError: ganho zero em um elemento seguido de outro
            (ou no último, o que torna o ganho total nulo)
    """
    gains = [np.asarray(e.gain_linear(grid), dtype=float) for e in chain.elements]
    temps = [np.asarray(e.noise_temperature(grid), dtype=float) for e in chain.elements]

    preceding = np.ones(len(grid))
    contributions = {}
    for idx, element in enumerate(chain.elements):
        contributions[element.label] = temps[idx] / preceding
        zero = np.nonzero(gains[idx] <= 0)[0]
        if zero.size:
            raise InfiniteReferredNoiseError(element.label, grid.points[zero[0]])
        preceding = preceding * gains[idx]

    te_total = np.sum(np.vstack(list(contributions.values())), axis=0)
    gain_db = 10.0 * np.log10(preceding)
    logger.debug("Cascata de %d elementos em %d pontos", len(chain.elements), len(grid))
    return ChainReport(grid, gain_db, te_total, contributions)


def band_summary(report: ChainReport, f_lo: float, f_hi: float) -> dict:
    """
    Estatísticas de uma sub-banda (ganho médio, Te mínimo, etc).

    Returns:
        Dict com n_points, gain_db_mean/min/max e te_k_mean/min/max
    """
    pts = report.grid.points
    mask = (pts >= f_lo) & (pts <= f_hi)
    if not np.any(mask):
        raise ValidationError(f"Nenhum ponto da grade entre {f_lo:.6g} e {f_hi:.6g} Hz")
    gain = report.cumulative_gain_db[mask]
    te = report.te_input_referred[mask]
    return {
        "f_lo_hz": float(f_lo),
        "f_hi_hz": float(f_hi),
        "n_points": int(mask.sum()),
        "gain_db_mean": float(gain.mean()),
        "gain_db_min": float(gain.min()),
        "gain_db_max": float(gain.max()),
        "te_k_mean": float(te.mean()),
        "te_k_min": float(te.min()),
        "te_k_max": float(te.max()),
    }


# --- Configuração JSON ---

def grid_from_config(spec: dict) -> FrequencyGrid:
    """{"start_hz", "stop_hz", "points"} ou {"points_hz": [...]}"""
    if not isinstance(spec, dict):
        raise ConfigError("Grade inválida na configuração: esperado um objeto")
    try:
        if "points_hz" in spec:
            points = np.asarray(spec["points_hz"], dtype=float)
        else:
            start, stop = float(spec["start_hz"]), float(spec["stop_hz"])
            n = int(spec["points"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Grade inválida na configuração: {e}") from e
    if "points_hz" in spec:
        return FrequencyGrid(points)
    if n < 1:
        raise ConfigError(f"Grade inválida na configuração: points = {n}")
    return FrequencyGrid.linspace(start, stop, n)


def chain_from_config(items: list[dict], base_dir: str = ".") -> SignalChain:
    """
    Monta uma SignalChain a partir da lista de elementos do JSON.

    Tipos aceitos:
        {"kind": "attenuator", "label", "loss_db", "t_phys"}
        {"kind": "amplifier", "label", "gain_db" | "gain_file", "te"}
        {"kind": "cable", "label", "loss_db", "t_in", "t_out", "model", "t_mid"?, "n_segments"?}
        {"kind": "sparam_file", "label", "path", "te"?}

    Caminhos de arquivo são relativos a base_dir.
    """
    from src.touchstone import load_touchstone

    if not isinstance(items, list) or not all(isinstance(item, dict) for item in items):
        raise ConfigError("Elementos da cadeia devem ser uma lista de objetos")
    elements = []
    for n, item in enumerate(items):
        kind = item.get("kind")
        label = item.get("label") or f"{kind}_{n + 1}"
        try:
            if kind == "attenuator":
                elements.append(Attenuator(label, float(item["loss_db"]), float(item["t_phys"])))
            elif kind == "amplifier":
                if "gain_file" in item:
                    doc = load_touchstone(os.path.join(base_dir, item["gain_file"]))
                    gain = doc.data
                else:
                    gain = float(item["gain_db"])
                elements.append(Amplifier(label, gain, float(item["te"])))
            elif kind == "cable":
                model = CableModel(
                    kind=item.get("model", "distributed"),
                    t_mid=item.get("t_mid"),
                    n_segments=item.get("n_segments"),
                )
                elements.append(Cable(
                    label, float(item["loss_db"]), float(item["t_in"]), float(item["t_out"]), model
                ))
            elif kind == "sparam_file":
                doc = load_touchstone(os.path.join(base_dir, item["path"]))
                if "te" in item:
                    elements.append(SParamElement(label, doc.data, float(item["te"])))
                else:
                    elements.append(SParamElement(label, doc.data, te_table=doc.te_table()))
            else:
                raise ConfigError(f"Elemento #{n + 1}: tipo desconhecido '{kind}'")
        except KeyError as e:
            raise ConfigError(f"Elemento '{label}': campo obrigatório ausente {e}") from e
        except CryoChainError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Elemento '{label}': valor inválido ({e})") from e
    return SignalChain(tuple(elements))
