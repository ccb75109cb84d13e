"""
Leitura e escrita de arquivos Touchstone v1 de duas portas (.s2p).

Formato esperado (ignorando comentários):
    # GHz S MA R 50
    f  S11  S21  S12  S22        (cada S como par RI, MA ou DB)

Frequências são convertidas para Hz internamente; a escrita restaura a
unidade declarada. Blocos de parâmetros de ruído (5 colunas, após os
dados S) são lidos numa tabela opcional.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from config.settings import DEFAULT_Z_REF
from src.errors import TouchstoneParseError, ValidationError
from src.rfnet import FrequencyGrid, TwoPortRecord, te_from_nf

logger = logging.getLogger(__name__)

FREQ_UNITS = {"HZ": ("Hz", 1.0), "KHZ": ("kHz", 1e3), "MHZ": ("MHz", 1e6), "GHZ": ("GHz", 1e9)}
FORMATS = ("RI", "MA", "DB")

# Ordem das colunas em v1: S11 S21 S12 S22
_COLUMN_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class OptionLine:
    freq_unit: str = "GHz"
    parameter: str = "S"
    format: str = "MA"
    z_ref: float = DEFAULT_Z_REF

    def __post_init__(self):
        if self.freq_unit.upper() not in FREQ_UNITS:
            raise ValidationError(f"Unidade de frequência desconhecida: {self.freq_unit}")
        if self.parameter.upper() != "S":
            raise ValidationError(f"Parâmetro não suportado: {self.parameter}")
        if self.format.upper() not in FORMATS:
            raise ValidationError(f"Formato desconhecido: {self.format}")
        if not self.z_ref > 0:
            raise ValidationError(f"Impedância de referência inválida: {self.z_ref}")
        object.__setattr__(self, "freq_unit", FREQ_UNITS[self.freq_unit.upper()][0])
        object.__setattr__(self, "format", self.format.upper())

    @property
    def multiplier(self) -> float:
        return FREQ_UNITS[self.freq_unit.upper()][1]

    def render(self) -> str:
        return f"# {self.freq_unit} S {self.format} R {self.z_ref:.17g}"


@dataclass(frozen=True, eq=False)
class NoiseTable:
    """Bloco de ruído: Fmin (dB), Gamma_opt (complexo) e Rn normalizado."""
    freq_hz: np.ndarray
    fmin_db: np.ndarray
    gamma_opt: np.ndarray
    rn: np.ndarray


@dataclass(frozen=True, eq=False)
class TouchstoneDocument:
    option_line: OptionLine
    data: TwoPortRecord
    comments: tuple = field(default_factory=tuple)
    noise: NoiseTable | None = None

    def te_table(self) -> tuple | None:
        """(freq_hz, Te em K) a partir de Fmin, ou None sem bloco de ruído."""
        if self.noise is None:
            return None
        return self.noise.freq_hz, te_from_nf(self.noise.fmin_db)


# --- Conversões de formato ---

def _pair_to_complex(a: float, b: float, fmt: str) -> complex:
    with np.errstate(over="ignore"):
        if fmt == "RI":
            return complex(a, b)
        if fmt == "MA":
            if a < 0:
                raise ValueError(f"magnitude negativa {a!r}")
            mag = a
        else:
            mag = float(np.power(10.0, a / 20.0))
    return complex(mag * np.exp(1j * np.deg2rad(b)))


def _complex_to_pair(z: complex, fmt: str) -> tuple[float, float]:
    if fmt == "RI":
        return z.real, z.imag
    mag = abs(z)
    ang = float(np.rad2deg(np.angle(z)))
    if fmt == "MA":
        return mag, ang
    with np.errstate(divide="ignore"):
        return float(20.0 * np.log10(mag)), ang


# --- Parser ---

def _parse_option_line(tokens: list[str], lineno: int) -> OptionLine:
    values = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in FREQ_UNITS:
            values["freq_unit"] = tok
        elif tok in FORMATS:
            values["format"] = tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneParseError("'R' sem valor de impedância", lineno)
            try:
                values["z_ref"] = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneParseError(f"impedância inválida '{tokens[i + 1]}'", lineno)
            i += 1
        elif tok in ("Y", "Z", "H", "G"):
            raise TouchstoneParseError(f"parâmetro '{tokens[i]}' não suportado (apenas S)", lineno)
        elif tok == "S":
            values["parameter"] = "S"
        else:
            raise TouchstoneParseError(f"token desconhecido na linha de opções '{tokens[i]}'", lineno)
        i += 1
    try:
        return OptionLine(**values)
    except ValidationError as e:
        raise TouchstoneParseError(str(e), lineno) from e


def _parse_floats(tokens: list[str], lineno: int) -> list[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise TouchstoneParseError(f"valor numérico inválido em '{' '.join(tokens)}'", lineno)


def parse_touchstone(text) -> TouchstoneDocument:
    """
    Interpreta o conteúdo de um arquivo .s2p (Touchstone v1).

    Args:
        text: Conteúdo do arquivo (str ou bytes)

    Returns:
        TouchstoneDocument com os dados convertidos para complexo e Hz

    Raises:
        TouchstoneParseError: com o número da linha (base 1)
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")

    option = None
    option_lineno = 0
    comments = []
    freqs, rows, row_lines = [], [], []
    noise_rows = []
    lineno = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("!"):
            comments.append(line[1:].strip())
            continue
        line = line.split("!", 1)[0].strip()
        if line.startswith("["):
            raise TouchstoneParseError(f"palavra-chave Touchstone v2 não suportada '{line}'", lineno)
        if line.startswith("#"):
            if option is not None:
                raise TouchstoneParseError("mais de uma linha de opções", lineno)
            if freqs:
                raise TouchstoneParseError("linha de opções depois dos dados", lineno)
            option = _parse_option_line(line[1:].split(), lineno)
            option_lineno = lineno
            continue

        if option is None:
            option = OptionLine()
        tokens = line.split()
        values = _parse_floats(tokens, lineno)
        if not np.isfinite(values[0]):
            raise TouchstoneParseError("frequência não finita", lineno)
        f_hz = values[0] * option.multiplier

        # Bloco de ruído: 5 colunas com frequência recomeçando
        if noise_rows or (freqs and len(values) == 5 and f_hz <= freqs[-1]):
            if len(values) != 5:
                raise TouchstoneParseError(
                    f"linha de ruído com {len(values)} campos, esperado 5", lineno
                )
            if noise_rows and f_hz <= noise_rows[-1][0]:
                raise TouchstoneParseError("frequência não crescente no bloco de ruído", lineno)
            noise_rows.append((f_hz, *values[1:]))
            continue

        if len(values) != 9:
            raise TouchstoneParseError(
                f"linha de dados com {len(values)} campos, esperado 9", lineno
            )
        if freqs and f_hz <= freqs[-1]:
            raise TouchstoneParseError("frequência não crescente", lineno)
        if f_hz <= 0:
            raise TouchstoneParseError("frequência deve ser > 0", lineno)

        matrix = np.zeros((2, 2), dtype=complex)
        try:
            for k, (i, j) in enumerate(_COLUMN_ORDER):
                matrix[i, j] = _pair_to_complex(values[1 + 2 * k], values[2 + 2 * k], option.format)
        except ValueError as e:
            raise TouchstoneParseError(str(e), lineno)
        if not np.all(np.isfinite(matrix)):
            raise TouchstoneParseError("parâmetro S não finito", lineno)
        freqs.append(f_hz)
        rows.append(matrix)
        row_lines.append(lineno)

    if option is None:
        option = OptionLine()
    if not freqs:
        raise TouchstoneParseError("nenhuma linha de dados encontrada", max(lineno, 1))

    try:
        record = TwoPortRecord(FrequencyGrid(np.array(freqs)), np.array(rows), option.z_ref)
    except ValidationError as e:
        raise TouchstoneParseError(str(e), option_lineno or row_lines[0]) from e

    noise = None
    if noise_rows:
        arr = np.array(noise_rows, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(arr[:, 1] < 0) or np.any(arr[:, 0] <= 0):
            raise TouchstoneParseError("bloco de ruído com valores inválidos", lineno)
        noise = NoiseTable(
            freq_hz=arr[:, 0],
            fmin_db=arr[:, 1],
            gamma_opt=arr[:, 2] * np.exp(1j * np.deg2rad(arr[:, 3])),
            rn=arr[:, 4],
        )

    logger.debug("Touchstone: %d pontos, formato %s", len(freqs), option.format)
    return TouchstoneDocument(option, record, tuple(comments), noise)


# --- Escrita ---

def write_touchstone(doc: TouchstoneDocument, fmt: str | None = None) -> str:
    """
    Gera o texto .s2p de um documento.

    Args:
        doc: Documento a escrever
        fmt: "RI", "MA" ou "DB" (padrão: formato do próprio documento)

    Returns:
        Texto com linha de opções, comentários e linhas de dados
    """
    fmt = (fmt or doc.option_line.format).upper()
    option = OptionLine(doc.option_line.freq_unit, "S", fmt, doc.option_line.z_ref)
    mult = option.multiplier

    lines = [option.render()]
    lines.extend(f"! {c}" if c else "!" for c in doc.comments)
    for f, matrix in zip(doc.data.grid.points, doc.data.s):
        fields = [f / mult]
        for i, j in _COLUMN_ORDER:
            fields.extend(_complex_to_pair(complex(matrix[i, j]), fmt))
        lines.append(" ".join(f"{v:.17g}" for v in fields))

    if doc.noise is not None:
        n = doc.noise
        for k in range(n.freq_hz.size):
            fields = [
                n.freq_hz[k] / mult,
                n.fmin_db[k],
                abs(n.gamma_opt[k]),
                float(np.rad2deg(np.angle(n.gamma_opt[k]))),
                n.rn[k],
            ]
            lines.append(" ".join(f"{v:.17g}" for v in fields))
    return "\n".join(lines) + "\n"


def load_touchstone(path: str) -> TouchstoneDocument:
    """Lê um arquivo .s2p do disco."""
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        text = f.read()
    try:
        return parse_touchstone(text)
    except TouchstoneParseError as e:
        raise TouchstoneParseError(e.message, e.line, path) from e


def save_touchstone(doc: TouchstoneDocument, path: str, fmt: str | None = None) -> str:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_touchstone(doc, fmt))
    return path
