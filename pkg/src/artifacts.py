"""
Escrita dos artefatos de saída (CSV/JSON) e leitura de tabelas de entrada.

Toda escrita passa por um diretório temporário ao lado do destino; os
arquivos só aparecem no destino quando o comando termina sem erro.
"""

import json
import logging
import math
import os
import shutil
import tempfile

import numpy as np
import pandas as pd

from config.settings import FLOAT_FORMAT, SIGNIFICANT_DIGITS
from src.errors import ConfigError, ValidationError

logger = logging.getLogger(__name__)


def _round_sig(value: float):
    if not math.isfinite(value):
        return None
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def to_jsonable(data):
    """Converte recursivamente numpy/float para tipos JSON com 9 dígitos."""
    if isinstance(data, dict):
        return {str(k): to_jsonable(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_jsonable(v) for v in data]
    if isinstance(data, np.ndarray):
        return [to_jsonable(v) for v in data.tolist()]
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        return _round_sig(float(data))
    return data


def load_json(path: str) -> dict:
    """Carrega um arquivo de configuração JSON."""
    if not os.path.exists(path):
        raise ConfigError(f"Arquivo não encontrado: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: JSON inválido na linha {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: esperado um objeto JSON no topo")
    return data


def save_json(data: dict, path: str):
    """Salva dados em JSON (determinístico, 9 dígitos significativos)."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(data), f, indent=2, ensure_ascii=False)
        f.write("\n")


def save_csv(columns: dict, path: str):
    """Salva colunas (nome -> sequência) em CSV com 9 dígitos significativos."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame = pd.DataFrame(columns)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def load_table(path: str, required: list[list[str]]) -> pd.DataFrame:
    """
    Lê um CSV com cabeçalho.

    Args:
        path: Caminho do CSV
        required: Alternativas de colunas obrigatórias; basta uma casar

    Raises:
        ValidationError: arquivo vazio, sem cabeçalho ou sem as colunas
    """
    if not os.path.exists(path):
        raise ConfigError(f"Arquivo não encontrado: {path}")
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise ValidationError(f"{path}: CSV vazio") from e
    except pd.errors.ParserError as e:
        raise ValidationError(f"{path}: CSV malformado ({e})") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.empty:
        raise ValidationError(f"{path}: CSV sem linhas de dados")
    for option in required:
        if all(c in frame.columns for c in option):
            return frame
    wanted = " ou ".join("(" + ", ".join(o) + ")" for o in required)
    raise ValidationError(f"{path}: colunas obrigatórias ausentes, esperado {wanted}")


class StagedOutput:
    """
    Diretório de saída atômico.

    Uso:
        with StagedOutput(out_dir) as stage:
            save_csv(..., stage.path("report.csv"))
    """

    def __init__(self, out_dir: str):
        self.out_dir = os.path.abspath(out_dir)
        self.tmp_dir = None

    def __enter__(self) -> "StagedOutput":
        parent = os.path.dirname(self.out_dir)
        os.makedirs(parent, exist_ok=True)
        self.tmp_dir = tempfile.mkdtemp(prefix=".staging-", dir=parent)
        return self

    def path(self, name: str) -> str:
        return os.path.join(self.tmp_dir, name)

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            shutil.rmtree(self.tmp_dir, ignore_errors=True)
            logger.debug("Saída descartada após erro: %s", self.out_dir)
            return False
        if not os.path.lexists(self.out_dir):
            os.replace(self.tmp_dir, self.out_dir)
            return False
        # o destino anterior sai inteiro; nada de uma execução antiga sobrevive
        previous = self.tmp_dir + ".old"
        os.replace(self.out_dir, previous)
        try:
            os.replace(self.tmp_dir, self.out_dir)
        except OSError:
            os.replace(previous, self.out_dir)
            shutil.rmtree(self.tmp_dir, ignore_errors=True)
            raise
        if os.path.isdir(previous) and not os.path.islink(previous):
            shutil.rmtree(previous, ignore_errors=True)
        else:
            os.remove(previous)
        logger.debug("Saída anterior substituída: %s", self.out_dir)
        return False
