"""
Simulação e análise da leitura dispersiva single-shot.

Funcionalidades:
- Resposta do ressonador dependente do estado do qubit (modelo de um polo)
- SNR a partir da temperatura de sistema da cadeia (radiometria clássica)
- Geração de tiros IQ com gerador contador (Philox), determinística por semente
- Alinhamento dos centros no eixo Q, estimador SNR^2 = (c1-c0)^2/(s1^2+s0^2)
- Fidelidade F = 1 - erfc(SNR/2)/2 e classificação por limiar
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from config.settings import BOLTZMANN, DEFAULT_HISTOGRAM_BINS, SHOT_BLOCK_SIZE
from src.errors import (
    DegenerateBlobsError,
    DomainError,
    InfiniteSNRError,
    ValidationError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResonatorModel:
    """
    Ressonador de leitura.

    Args:
        f_r: Frequência nua (Hz)
        kappa: Largura de linha total (Hz)
        chi: Meio deslocamento dispersivo; o estado |i> desloca a
            ressonância de (2i - 1)*chi
    """
    f_r: float
    kappa: float
    chi: float

    def __post_init__(self):
        if not self.f_r > 0:
            raise ValidationError(f"f_r deve ser > 0 (recebido {self.f_r})")
        if not self.kappa > 0:
            raise ValidationError(f"kappa deve ser > 0 (recebido {self.kappa})")
        if not math.isfinite(self.chi):
            raise ValidationError("chi deve ser real e finito")

    def resonance(self, state: int) -> float:
        return self.f_r + (2 * state - 1) * self.chi


@dataclass(frozen=True)
class ReadoutConfig:
    """
    Parâmetros de uma leitura.

    Args:
        probe_freq: Frequência do tom de prova (Hz)
        p_in: Potência no plano de referência (W)
        tau: Tempo de integração (s)
        t_sys: Temperatura de sistema referida ao mesmo plano (K)
        decay_prob: Probabilidade de o estado excitado relaxar antes da integração
        sigma_override: Desvio padrão por quadratura imposto (ignora t_sys)
    """
    probe_freq: float
    p_in: float
    tau: float
    t_sys: float
    decay_prob: float = 0.0
    sigma_override: float | None = None

    def __post_init__(self):
        if not self.probe_freq > 0:
            raise ValidationError(f"probe_freq deve ser > 0 (recebido {self.probe_freq})")
        if not self.tau > 0:
            raise ValidationError(f"tau deve ser > 0 (recebido {self.tau})")
        if self.p_in < 0:
            raise ValidationError(f"p_in deve ser >= 0 (recebido {self.p_in})")
        if self.t_sys < 0:
            raise ValidationError(f"t_sys deve ser >= 0 (recebido {self.t_sys})")
        if not 0.0 <= self.decay_prob <= 1.0:
            raise ValidationError(f"decay_prob fora de [0, 1]: {self.decay_prob}")
        if self.sigma_override is not None and self.sigma_override < 0:
            raise ValidationError("sigma_override deve ser >= 0")

    def noise_sigma(self) -> float:
        """Desvio por quadratura: sigma^2 = k_B*T_sys/(4*tau)."""
        if self.sigma_override is not None:
            return float(self.sigma_override)
        return math.sqrt(BOLTZMANN * self.t_sys / (4.0 * self.tau))


class IQPoint(NamedTuple):
    i: float
    q: float
    true_state: int


def s21_dispersive(f: float, state: int, r: ResonatorModel) -> complex:
    """
    Transmissão de um polo: S21 = (kappa/2) / (kappa/2 - i*(f - f_state)).

    |S21| = 1 na ressonância deslocada e tende a 0 longe dela.
    """
    if state not in (0, 1):
        raise ValidationError(f"Estado inválido: {state}")
    half = r.kappa / 2.0
    return half / complex(half, -(f - r.resonance(state)))


def centers(cfg: ReadoutConfig, r: ResonatorModel) -> tuple[complex, complex]:
    amp = math.sqrt(cfg.p_in)
    return (
        s21_dispersive(cfg.probe_freq, 0, r) * amp,
        s21_dispersive(cfg.probe_freq, 1, r) * amp,
    )


def snr_from_sigma(c0: complex, c1: complex, sigma: float) -> float:
    """SNR com sigma0 = sigma1 = sigma."""
    if sigma == 0:
        raise InfiniteSNRError()
    return abs(c1 - c0) / math.sqrt(2.0 * sigma * sigma)


def snr_from_chain(cfg: ReadoutConfig, r: ResonatorModel) -> float:
    """
    SNR previsto pela cadeia: c_i = S21(probe, i)*sqrt(p_in), sigma^2 = k_B*T_sys/(4*tau).

    Raises:
        InfiniteSNRError: t_sys = 0 sem sigma imposto
    """
    c0, c1 = centers(cfg, r)
    return snr_from_sigma(c0, c1, cfg.noise_sigma())


def config_for_snr(snr: float, r: ResonatorModel, cfg: ReadoutConfig) -> ReadoutConfig:
    """Escolhe p_in para que snr_from_chain devolva `snr`."""
    if snr < 0:
        raise DomainError(f"snr deve ser >= 0 (recebido {snr})")
    contrast = abs(s21_dispersive(cfg.probe_freq, 1, r) - s21_dispersive(cfg.probe_freq, 0, r))
    if contrast == 0:
        raise DomainError("Contraste nulo entre estados (chi = 0?)")
    sigma = cfg.noise_sigma()
    if sigma == 0:
        raise InfiniteSNRError()
    p_in = (snr * math.sqrt(2.0) * sigma / contrast) ** 2
    return replace(cfg, p_in=p_in)


def fidelity_from_snr(snr: float) -> float:
    """F = 1 - erfc(SNR/2)/2, em [0.5, 1]."""
    if not snr >= 0:
        raise DomainError(f"snr deve ser >= 0 (recebido {snr})")
    return float(1.0 - erfc(snr / 2.0) / 2.0)


# --- Conjunto de tiros ---

@dataclass(frozen=True, eq=False)
class ShotSet:
    """Tiros IQ com rótulo do estado verdadeiro."""
    i: np.ndarray
    q: np.ndarray
    true_state: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=float)
        q = np.asarray(self.q, dtype=float)
        s = np.asarray(self.true_state, dtype=np.int8)
        if not (i.shape == q.shape == s.shape) or i.ndim != 1:
            raise ValidationError("i, q e true_state devem ter o mesmo tamanho")
        if not (np.all(np.isfinite(i)) and np.all(np.isfinite(q))):
            raise ValidationError("Tiros com componentes não finitas")
        if np.any((s != 0) & (s != 1)):
            raise ValidationError("true_state deve ser 0 ou 1")
        for name, arr in (("i", i), ("q", q), ("true_state", s)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_points(cls, points: list[IQPoint]) -> "ShotSet":
        return cls(
            np.array([p.i for p in points], dtype=float),
            np.array([p.q for p in points], dtype=float),
            np.array([p.true_state for p in points], dtype=np.int8),
        )

    def __len__(self) -> int:
        return self.i.size

    def points(self):
        for i, q, s in zip(self.i, self.q, self.true_state):
            yield IQPoint(float(i), float(q), int(s))

    @property
    def iq(self) -> np.ndarray:
        return self.i + 1j * self.q

    def count(self, state: int) -> int:
        return int(np.count_nonzero(self.true_state == state))

    def center(self, state: int) -> complex:
        mask = self.true_state == state
        if not np.any(mask):
            raise DegenerateBlobsError(f"Nenhum tiro do estado {state}")
        return complex(self.iq[mask].mean())

    @property
    def c0(self) -> complex:
        return self.center(0)

    @property
    def c1(self) -> complex:
        return self.center(1)

    def axis(self) -> complex:
        """Direção unitária de c0 para c1."""
        d = self.c1 - self.c0
        if d == 0:
            raise DegenerateBlobsError()
        return d / abs(d)

    def sigma(self, state: int) -> float:
        """Desvio padrão amostral ao longo do eixo de discriminação."""
        if self.count(state) < 2:
            raise ValidationError(f"São necessários >= 2 tiros do estado {state}")
        proj = (self.iq[self.true_state == state] * np.conj(self.axis())).real
        return float(np.std(proj, ddof=1))

    @property
    def sigma0(self) -> float:
        return self.sigma(0)

    @property
    def sigma1(self) -> float:
        return self.sigma(1)

    def rotate(self, angle: float) -> "ShotSet":
        """Rotação rígida no plano IQ."""
        z = self.iq * np.exp(1j * angle)
        return ShotSet(z.real, z.imag, self.true_state)

    def scale(self, factor: float) -> "ShotSet":
        return ShotSet(self.i * factor, self.q * factor, self.true_state)


# --- Geração ---

def _block_rng(seed: int, block: int) -> np.random.Generator:
    # Philox é contador: cada bloco começa num contador próprio
    return np.random.Generator(np.random.Philox(key=seed, counter=block << 128))


def _simulate_block(
    seed: int,
    block: int,
    n_per_state: int,
    c0: complex,
    c1: complex,
    sigma: float,
    decay_prob: float,
) -> np.ndarray:
    start = block * SHOT_BLOCK_SIZE
    stop = min(start + SHOT_BLOCK_SIZE, 2 * n_per_state)
    m = stop - start
    rng = _block_rng(seed, block)
    u = rng.random(m)
    noise = rng.standard_normal((m, 2))

    states = (np.arange(start, stop) >= n_per_state).astype(np.int8)
    decayed = (states == 1) & (u < decay_prob)
    center = np.where((states == 1) & ~decayed, c1, c0)
    out = np.empty((m, 3))
    out[:, 0] = center.real + sigma * noise[:, 0]
    out[:, 1] = center.imag + sigma * noise[:, 1]
    out[:, 2] = states
    return out


def simulate_shots(
    cfg: ReadoutConfig,
    r: ResonatorModel,
    n_per_state: int,
    seed: int = 0,
    workers: int = 1,
) -> ShotSet:
    """
    Gera 2*n_per_state tiros IQ (primeiro os do estado 0).

    Cada bloco de SHOT_BLOCK_SIZE tiros usa um contador Philox próprio,
    então o resultado depende só de (seed, índice) e não de `workers`.

    Args:
        cfg: Configuração de leitura (sigma vem de t_sys ou sigma_override)
        r: Modelo do ressonador
        n_per_state: Tiros por estado
        seed: Semente (>= 0)
        workers: Threads para gerar blocos em paralelo
    """
    if n_per_state < 1:
        raise ValidationError(f"n_per_state deve ser >= 1 (recebido {n_per_state})")
    if not 0 <= seed < 2 ** 128:
        raise ValidationError(f"seed deve estar em [0, 2^128) (recebido {seed})")

    c0, c1 = centers(cfg, r)
    sigma = cfg.noise_sigma()
    n_blocks = -(-2 * n_per_state // SHOT_BLOCK_SIZE)
    args = (n_per_state, c0, c1, sigma, cfg.decay_prob)

    if workers <= 1 or n_blocks == 1:
        blocks = [_simulate_block(seed, b, *args) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda b: _simulate_block(seed, b, *args), range(n_blocks)))

    data = np.vstack(blocks)
    logger.debug("Simulados %d tiros em %d blocos (sigma=%.3g)", len(data), n_blocks, sigma)
    return ShotSet(data[:, 0], data[:, 1], data[:, 2].astype(np.int8))


# --- Análise ---

def align_rotation(shots: ShotSet) -> tuple[float, ShotSet]:
    """
    Gira o plano IQ para alinhar c1 - c0 com +Q.

    Returns:
        (ângulo em rad, tiros girados)

    Raises:
        DegenerateBlobsError: centros coincidentes
    """
    if shots.count(0) == 0 or shots.count(1) == 0:
        raise DegenerateBlobsError("Os dois estados precisam estar presentes")
    d = shots.c1 - shots.c0
    if d == 0:
        raise DegenerateBlobsError()
    angle = math.pi / 2 - math.atan2(d.imag, d.real)
    angle = math.atan2(math.sin(angle), math.cos(angle))
    return angle, shots.rotate(angle)


def snr_estimate(shots: ShotSet) -> float:
    """
    Estimador plug-in: SNR^2 = (c1 - c0)^2 / (sigma1^2 + sigma0^2).

    Calculado na projeção sobre o eixo c0->c1, equivalente à coordenada Q
    após align_rotation. Blobs idênticos devolvem 0.
    """
    if shots.count(0) < 2 or shots.count(1) < 2:
        raise ValidationError("São necessários >= 2 tiros de cada estado")
    d = shots.c1 - shots.c0
    if d == 0:
        return 0.0
    var = shots.sigma0 ** 2 + shots.sigma1 ** 2
    if var == 0:
        raise InfiniteSNRError()
    return abs(d) / math.sqrt(var)


@dataclass(frozen=True)
class ConfusionReport:
    f0: float
    f1: float
    f_avg: float
    threshold: float
    angle: float


def assign_states(shots: ShotSet, angle: float, threshold: float) -> np.ndarray:
    """Estado atribuído a cada tiro: 1 se Q girado > limiar."""
    return (shots.rotate(angle).q > threshold).astype(np.int8)


def classify_and_confusion(shots: ShotSet) -> ConfusionReport:
    """
    Classifica pelo ponto médio entre c0 e c1 no eixo Q girado.

    Returns:
        ConfusionReport com f0, f1, média e limiar em coordenadas giradas
    """
    angle, rotated = align_rotation(shots)
    threshold = (rotated.c0.imag + rotated.c1.imag) / 2.0
    assigned = (rotated.q > threshold).astype(np.int8)
    correct = assigned == rotated.true_state
    f0 = float(correct[rotated.true_state == 0].mean())
    f1 = float(correct[rotated.true_state == 1].mean())
    return ConfusionReport(f0, f1, (f0 + f1) / 2.0, threshold, angle)


def histogram(shots: ShotSet, bins: int = DEFAULT_HISTOGRAM_BINS) -> dict:
    """
    Histograma na coordenada Q alinhada, bordas comuns aos dois estados.

    Returns:
        Dict com bin_center_q, count_state0, count_state1
    """
    _, rotated = align_rotation(shots)
    edges = np.histogram_bin_edges(rotated.q, bins=bins)
    h0, _ = np.histogram(rotated.q[rotated.true_state == 0], bins=edges)
    h1, _ = np.histogram(rotated.q[rotated.true_state == 1], bins=edges)
    return {
        "bin_center_q": (edges[:-1] + edges[1:]) / 2.0,
        "count_state0": h0,
        "count_state1": h1,
    }
