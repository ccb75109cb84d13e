#!/usr/bin/env python3
"""
CryoChain - Modelagem e calibração da cadeia de leitura criogênica.

Uso:
    python main.py chain --config chain.json --out output/chain
    python main.py noisecal --config cal.json --out output/cal
    python main.py readout --config readout.json --out output/readout --seed 1
    python main.py budget --config budget.json --out output/budget

Exemplos:
    # Cascata de ruído de um atenuador frio + LNA
    python main.py chain --config configs/chain.json --out output/chain

    # Varredura de SNR alvo (uma linha de resumo por valor em sweep.csv)
    python main.py readout --config readout.json --out output/sweep --sweep readout.target_snr=2,3,4

Códigos de saída: 0 sucesso, 1 falha numérica/física, 2 entrada inválida.
Verbosidade do log: variável de ambiente CRYOCHAIN_LOG_LEVEL.
"""

import argparse
import copy
import json
import logging
import os
import sys

# Adiciona o diretório raiz ao path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pandas as pd

from config.settings import (
    DEFAULT_HISTOGRAM_BINS,
    DEFAULT_LOG_LEVEL,
    LOG_LEVEL_ENV,
    OUTPUT_DIR,
)
from src.artifacts import StagedOutput, load_json, load_table, save_csv, save_json
from src.budget import (
    BiasTopology,
    DeploymentSpec,
    StageSpec,
    budget_to_dict,
    format_budget_table,
    max_lna_power,
    plan_budget,
)
from src.errors import CalibrationFailedError, ConfigError, CryoChainError, ValidationError
from src.noisecal import (
    DeembedContext,
    EnrTable,
    NoiseMeasurement,
    NoiseSourceSpec,
    deembed_over_grid,
)
from src.readout import (
    ReadoutConfig,
    ResonatorModel,
    assign_states,
    classify_and_confusion,
    config_for_snr,
    fidelity_from_snr,
    histogram,
    simulate_shots,
    snr_estimate,
    snr_from_chain,
)
from src.rfnet import band_summary, cascade_noise, chain_from_config, grid_from_config

logger = logging.getLogger("cryochain")

COMMANDS = ("chain", "noisecal", "readout", "budget")

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2


def _build(cls, spec: dict, name: str, **renames):
    """Instancia um dataclass a partir de um bloco do JSON."""
    if not isinstance(spec, dict):
        raise ConfigError(f"Bloco '{name}' ausente ou inválido")
    kwargs = {renames.get(k, k): v for k, v in spec.items()}
    try:
        return cls(**kwargs)
    except CryoChainError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Bloco '{name}': {e}") from e


def _number(value, name: str, kind=float):
    """Converte um valor da configuração; texto não numérico vira ConfigError."""
    try:
        return kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"'{name}' deve ser numérico (recebido {value!r})") from e


# --- Comandos ---

def cmd_chain(config: dict, stage: StagedOutput, base_dir: str, args) -> dict:
    """Cascata de ruído: escreve chain_report.csv (e band_summary.json se pedido)."""
    grid = grid_from_config(config.get("grid") or {})
    chain = chain_from_config(config.get("elements") or [], base_dir)
    report = cascade_noise(chain, grid)

    columns = {
        "freq_hz": grid.points,
        "gain_db": report.cumulative_gain_db,
        "te_k": report.te_input_referred,
    }
    for label, contribution in report.per_element_contribution.items():
        columns[f"{label}_te_k"] = contribution
    save_csv(columns, stage.path("chain_report.csv"))

    summary = band_summary(report, grid.points[0], grid.points[-1])
    band = config.get("band")
    if band:
        if not isinstance(band, (list, tuple)) or len(band) != 2:
            raise ConfigError("'band' deve ser [f_lo_hz, f_hi_hz]")
        summary = band_summary(report, _number(band[0], "band"), _number(band[1], "band"))
        save_json(summary, stage.path("band_summary.json"))

    print(f"  Elementos: {', '.join(chain.labels)}")
    print(f"  Ganho médio: {summary['gain_db_mean']:.3f} dB")
    print(f"  Te mínimo: {summary['te_k_min']:.4g} K | Te máximo: {summary['te_k_max']:.4g} K")
    return summary


def _noise_source(spec: dict) -> NoiseSourceSpec:
    spec = dict(spec or {})
    table = spec.pop("enr_table", None)
    if table is not None:
        spec["enr_table"] = _build(EnrTable, table, "source.enr_table")
    return _build(NoiseSourceSpec, spec, "source")


def _deembed_context(config: dict, base_dir: str) -> DeembedContext:
    items = config.get("input_chain") or []
    chain = chain_from_config(items, base_dir) if items else None

    gain_table = None
    if "dut_gain_table" in config:
        table = config["dut_gain_table"]
        try:
            gain_table = (np.asarray(table["freq_hz"], float), np.asarray(table["gain_db"], float))
        except (TypeError, KeyError, ValueError) as e:
            raise ConfigError(f"dut_gain_table inválida: {e}") from e
    elif "dut_gain_file" in config:
        from src.touchstone import load_touchstone

        doc = load_touchstone(os.path.join(base_dir, config["dut_gain_file"]))
        gain_table = (doc.data.grid.points, 10 * np.log10(doc.data.gain_linear()))

    dut_gain_db = config.get("dut_gain_db")
    return DeembedContext(
        input_chain=chain,
        backend_te=_number(config.get("backend_te", 0.0), "backend_te"),
        dut_gain_db=None if dut_gain_db is None else _number(dut_gain_db, "dut_gain_db"),
        dut_gain_table=gain_table,
    )


def cmd_noisecal(config: dict, stage: StagedOutput, base_dir: str, args) -> dict:
    """De-embed por frequência: escreve te_dut.csv."""
    path = getattr(args, "input", None) or config.get("measurements")
    if not path:
        raise ConfigError("Informe o CSV de medição ('measurements' ou --input)")
    if not os.path.isabs(path) and not getattr(args, "input", None):
        path = os.path.join(base_dir, path)

    table = load_table(path, [["freq_hz", "y_linear"], ["freq_hz", "p_hot_w", "p_cold_w"]])
    # células não numéricas de freq_hz ficam NaN na linha marcada
    freqs = pd.to_numeric(table["freq_hz"], errors="coerce").to_numpy(dtype=float)
    source = _noise_source(config.get("source"))
    ctx = _deembed_context(config, base_dir)

    measurements, early = [], {}
    for idx, row in table.iterrows():
        try:
            if "y_linear" in table.columns:
                m = NoiseMeasurement(source, y=float(row["y_linear"]), freq_hz=float(row["freq_hz"]))
            else:
                m = NoiseMeasurement(
                    source,
                    p_hot=float(row["p_hot_w"]),
                    p_cold=float(row["p_cold_w"]),
                    freq_hz=float(row["freq_hz"]),
                )
            measurements.append(m)
        except (TypeError, ValueError) as e:
            early[idx] = getattr(e, "reason", "invalid input")
            measurements.append(None)

    valid = [m for m in measurements if m is not None]
    rows = iter(deembed_over_grid(valid, ctx, workers=args.workers))

    columns = {k: [] for k in ("freq_hz", "te_sys_k", "te_dut_k", "backend_term_k", "flag")}
    n_ok = 0
    for idx, m in enumerate(measurements):
        if m is None:
            columns["freq_hz"].append(freqs[idx])
            columns["te_sys_k"].append(np.nan)
            columns["te_dut_k"].append(np.nan)
            columns["backend_term_k"].append(np.nan)
            columns["flag"].append(early[idx])
            continue
        row = next(rows)
        columns["freq_hz"].append(row.freq_hz)
        columns["te_sys_k"].append(row.te_sys if row.te_sys is not None else np.nan)
        columns["te_dut_k"].append(row.result.te_dut if row.ok else np.nan)
        columns["backend_term_k"].append(row.result.backend_term if row.ok else np.nan)
        flag = row.reason if not row.ok else ";".join(row.result.warnings)
        columns["flag"].append(flag)
        n_ok += row.ok

    if n_ok == 0:
        reasons = sorted(set(columns["flag"]))
        raise CalibrationFailedError(f"Nenhuma linha válida ({', '.join(reasons)})")

    save_csv(columns, stage.path("te_dut.csv"))
    te = np.array(columns["te_dut_k"], dtype=float)
    summary = {
        "rows": len(measurements),
        "rows_ok": n_ok,
        "te_dut_k_min": float(np.nanmin(te)),
        "te_dut_k_mean": float(np.nanmean(te)),
        "te_dut_k_max": float(np.nanmax(te)),
    }
    print(f"  Linhas válidas: {n_ok}/{len(measurements)}")
    print(f"  Te DUT: min {summary['te_dut_k_min']:.4g} K | média {summary['te_dut_k_mean']:.4g} K")
    return summary


def _readout_setup(config: dict) -> tuple[ReadoutConfig, ResonatorModel]:
    resonator = _build(ResonatorModel, config.get("resonator"), "resonator")
    spec = dict(config.get("readout") or {})
    target = spec.pop("target_snr", None)
    spec.setdefault("p_in", 0.0)
    cfg = _build(ReadoutConfig, spec, "readout")
    if target is not None:
        cfg = config_for_snr(_number(target, "readout.target_snr"), resonator, cfg)
    return cfg, resonator


def _readout_summary(cfg, resonator, n_per_state, seed, workers, stage=None, bins=None) -> dict:
    shots = simulate_shots(cfg, resonator, n_per_state, seed=seed, workers=workers)
    snr = snr_estimate(shots)
    confusion = classify_and_confusion(shots)
    summary = {
        "snr_eq1": snr,
        "snr_chain": snr_from_chain(cfg, resonator),
        "f0": confusion.f0,
        "f1": confusion.f1,
        "f_avg": confusion.f_avg,
        "fidelity_from_snr": fidelity_from_snr(snr),
        "threshold": confusion.threshold,
        "angle_rad": confusion.angle,
        "p_in_w": cfg.p_in,
        "n_per_state": n_per_state,
        "seed": seed,
    }
    if stage is not None:
        assigned = assign_states(shots, confusion.angle, confusion.threshold)
        save_csv(
            {"i": shots.i, "q": shots.q, "true_state": shots.true_state, "assigned_state": assigned},
            stage.path("shots.csv"),
        )
        save_csv(histogram(shots, bins or DEFAULT_HISTOGRAM_BINS), stage.path("histogram.csv"))
    return summary


def cmd_readout(config: dict, stage: StagedOutput, base_dir: str, args) -> dict:
    """Simulação single-shot: shots.csv, histogram.csv e summary.json."""
    cfg, resonator = _readout_setup(config)
    n_per_state = _number(config.get("n_per_state", 1000), "n_per_state", int)
    bins = _number(config.get("bins", DEFAULT_HISTOGRAM_BINS), "bins", int)

    summary = _readout_summary(
        cfg, resonator, n_per_state, args.seed, args.workers, stage=stage, bins=bins
    )
    save_json(summary, stage.path("summary.json"))

    power_sweep = config.get("power_sweep")
    if power_sweep:
        # SNR medido indexado pela potência DC do LNA
        powers = power_sweep.get("p_lna_w") or []
        snrs = power_sweep.get("snr") or []
        if len(powers) != len(snrs) or not powers:
            raise ConfigError("power_sweep: p_lna_w e snr devem ter o mesmo tamanho (> 0)")
        columns = {k: [] for k in ("p_lna_w", "snr_target", "snr_eq1", "f0", "f1", "f_avg", "fidelity_from_snr")}
        for p_lna, target in zip(powers, snrs):
            point = _readout_summary(
                config_for_snr(_number(target, "power_sweep.snr"), resonator, cfg),
                resonator, n_per_state, args.seed, args.workers,
            )
            columns["p_lna_w"].append(_number(p_lna, "power_sweep.p_lna_w"))
            columns["snr_target"].append(float(target))
            for key in ("snr_eq1", "f0", "f1", "f_avg", "fidelity_from_snr"):
                columns[key].append(point[key])
        save_csv(columns, stage.path("power_sweep.csv"))

    print(f"  SNR medido: {summary['snr_eq1']:.4f} | previsto: {summary['snr_chain']:.4f}")
    print(f"  F0 = {summary['f0']:.4%} | F1 = {summary['f1']:.4%} | média = {summary['f_avg']:.4%}")
    print(f"  Fidelidade teórica: {summary['fidelity_from_snr']:.4%}")
    return summary


def cmd_budget(config: dict, stage: StagedOutput, base_dir: str, args) -> dict:
    """Orçamento de potência: budget.json e tabela no terminal."""
    deployment = _build(DeploymentSpec, config.get("deployment"), "deployment", p_lna_w="p_lna")
    stage_spec = _build(StageSpec, config.get("stage"), "stage", cooling_power_w="cooling_power")
    topology = None
    if config.get("bias_topology"):
        topology = _build(BiasTopology, config["bias_topology"], "bias_topology")

    report = plan_budget(deployment, stage_spec)
    data = budget_to_dict(report, topology)
    data["max_p_lna_w"] = max_lna_power(deployment, stage_spec)
    save_json(data, stage.path("budget.json"))
    print(format_budget_table(data))
    return {k: v for k, v in data.items() if not isinstance(v, dict)}


HANDLERS = {
    "chain": cmd_chain,
    "noisecal": cmd_noisecal,
    "readout": cmd_readout,
    "budget": cmd_budget,
}


# --- Varredura ---

def _parse_sweep(text: str) -> tuple[str, list]:
    """'chave.aninhada=v1,v2,...' -> (chave, [valores])"""
    if "=" not in text:
        raise ConfigError(f"--sweep inválido '{text}', use chave=v1,v2,...")
    key, raw = text.split("=", 1)
    values = []
    for token in raw.split(","):
        token = token.strip()
        try:
            values.append(json.loads(token))
        except json.JSONDecodeError:
            values.append(token)
    if not key or not values:
        raise ConfigError(f"--sweep inválido '{text}'")
    return key.strip(), values


def _set_key(config: dict, dotted: str, value) -> dict:
    out = copy.deepcopy(config)
    node = out
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"Chave de varredura '{dotted}' não aponta para um objeto")
    node[parts[-1]] = value
    return out


def run_command(args) -> int:
    """Carrega a configuração, executa o comando (ou a varredura) e grava as saídas."""
    config = load_json(args.config)
    declared = config.get("command", args.command)
    if declared != args.command:
        raise ConfigError(f"Configuração declara '{declared}', comando pedido '{args.command}'")
    if args.seed is None:
        args.seed = _number(config.get("seed", 0), "seed", int)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    handler = HANDLERS[args.command]

    print("=" * 60)
    print(f"CRYOCHAIN - {args.command}")
    print("=" * 60)

    with StagedOutput(args.out) as stage:
        if not args.sweep:
            handler(config, stage, base_dir, args)
        else:
            key, values = _parse_sweep(args.sweep)
            rows = []
            for n, value in enumerate(values):
                print(f"\n[{n + 1}/{len(values)}] {key} = {value}")
                sub = _SubStage(stage, f"sweep_{n:03d}")
                summary = handler(_set_key(config, key, value), sub, base_dir, args)
                rows.append({key: value, **summary})
            columns = {k: [r.get(k) for r in rows] for k in rows[0]}
            save_csv(columns, stage.path("sweep.csv"))

    print(f"\nSaída: {os.path.abspath(args.out)}")
    return EXIT_OK


class _SubStage:
    """Subdiretório dentro de um StagedOutput (uma entrada da varredura)."""

    def __init__(self, parent: StagedOutput, name: str):
        self.parent = parent
        self.name = name

    def path(self, name: str) -> str:
        return self.parent.path(os.path.join(self.name, name))


def _setup_logging():
    level = os.environ.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="CryoChain - cadeia de leitura criogênica: ruído, calibração, leitura e orçamento"
    )
    subparsers = parser.add_subparsers(dest="command")

    helps = {
        "chain": "Cascata de ganho/ruído de uma cadeia",
        "noisecal": "De-embed do Te do DUT (método do atenuador frio)",
        "readout": "Simulação de leitura dispersiva single-shot",
        "budget": "Orçamento de potência do refrigerador",
    }
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=helps[name])
        sub.add_argument("--config", required=True, help="Arquivo JSON de configuração")
        sub.add_argument("--out", default=os.path.join(OUTPUT_DIR, name), help="Diretório de saída")
        sub.add_argument("--seed", type=int, help="Semente (padrão: 'seed' do JSON ou 0)")
        sub.add_argument("--sweep", help="Varredura chave=v1,v2,... sobre a configuração")
        sub.add_argument("--workers", type=int, default=1, help="Threads internas (não altera a saída)")
        if name == "noisecal":
            sub.add_argument("--input", help="CSV de medição (substitui 'measurements')")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_INPUT

    _setup_logging()
    try:
        return run_command(args)
    except (ValidationError, OSError) as e:
        logger.error("%s", e)
        return EXIT_INPUT
    except CryoChainError as e:
        logger.error("%s", e)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
