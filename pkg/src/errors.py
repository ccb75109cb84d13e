"""
Exceções e avisos do toolkit.

Cada erro carrega um `reason` estável (em inglês) usado nas flags dos CSVs
e nos testes; a mensagem legível fica em português.
"""


class CryoChainError(Exception):
    """Erro base de todos os módulos."""
    reason = "error"


class DomainError(CryoChainError, ValueError):
    """Argumento fora do domínio da função (ex: NF negativo)."""
    reason = "domain error"


class ValidationError(CryoChainError, ValueError):
    """Dados de entrada violam um invariante de tipo."""
    reason = "invalid input"


class ConfigError(ValidationError):
    """Arquivo de configuração inválido ou incompleto."""
    reason = "invalid config"


class GridError(ValidationError):
    reason = "grid mismatch"


class ExtrapolationError(GridError):
    """Pedido de reamostragem fora da faixa medida."""
    reason = "extrapolation"

    def __init__(self, points):
        self.points = list(points)
        shown = ", ".join(f"{p:.6g}" for p in self.points[:8])
        more = "..." if len(self.points) > 8 else ""
        super().__init__(f"Extrapolação proibida, pontos fora da faixa (Hz): {shown}{more}")


class SingularNetworkError(CryoChainError):
    """Conversão S->T impossível porque S21 = 0."""
    reason = "singular network"

    def __init__(self, frequency: float):
        self.frequency = frequency
        super().__init__(f"S21 = 0 em {frequency:.9g} Hz, matriz T singular")


class InfiniteReferredNoiseError(CryoChainError):
    reason = "infinite referred noise"

    def __init__(self, element: str, frequency: float):
        self.element = element
        self.frequency = frequency
        super().__init__(
            f"Ruído referido infinito: elemento '{element}' tem ganho zero em {frequency:.9g} Hz"
        )


class TouchstoneParseError(ValidationError):
    """Erro de parsing com número de linha (base 1) e, quando houver, o arquivo."""
    reason = "touchstone parse error"

    def __init__(self, message: str, line: int, path: str | None = None):
        self.message = message
        self.line = line
        self.path = path
        where = f"{path}, linha {line}" if path else f"linha {line}"
        super().__init__(f"{where}: {message}")


class NoExcessNoiseError(CryoChainError):
    reason = "no excess noise"

    def __init__(self, y: float):
        self.y = y
        super().__init__(f"Sem excesso de ruído: Y = {y:.9g} <= 1")


class NonphysicalMeasurementError(CryoChainError):
    reason = "nonphysical measurement"

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"Medição não física: Te calculado = {value:.9g} K")


class OvercorrectedDeembedError(CryoChainError):
    reason = "overcorrected de-embed"

    def __init__(self, value: float, terms: dict):
        self.value = value
        self.terms = dict(terms)
        detail = ", ".join(f"{k}={v:.6g}" for k, v in self.terms.items())
        super().__init__(f"De-embed supercorrigido: Te_DUT = {value:.6g} K ({detail})")


class InfiniteSNRError(CryoChainError):
    reason = "infinite SNR"

    def __init__(self):
        super().__init__("SNR infinito: t_sys = 0 K, modelo clássico não se aplica")


class DegenerateBlobsError(CryoChainError):
    reason = "degenerate blobs"

    def __init__(self, message: str = "Centros dos dois estados coincidem"):
        super().__init__(message)


class CalibrationFailedError(CryoChainError):
    """Nenhuma linha da medição produziu um Te válido."""
    reason = "all rows failed"


# --- Avisos ---

class BackendDominatedWarning(UserWarning):
    """Ganho do DUT baixo demais: o backend domina a extração."""
    reason = "backend-dominated extraction"


class CurrentMismatchWarning(UserWarning):
    reason = "current mismatch; largest stage current assumed"


class InputChainGainWarning(UserWarning):
    """Cadeia de entrada do de-embed com ganho > 0 dB."""
    reason = "input chain has gain"
