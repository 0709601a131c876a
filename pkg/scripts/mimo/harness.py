#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Drivers Monte Carlo: varreduras lineares e de sphere decoder, estudo do
raio por iteração e diagnósticos por k.

Determinismo: a tentativa i usa apenas ``trial_rng(master_seed, i)``; os
resultados por tentativa voltam na ordem do índice e a redução é feita
nessa ordem, então o número de workers nunca altera a saída.

A mesma tentativa reaproveita canal, símbolos e ruído normalizado em todos
os pontos de SNR (só a escala do ruído muda), o que torna as comparações
entre detectores e entre SNRs pareadas.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import repeat
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import numpy as np

from analysis import (
    RadiusStudyRecord,
    agregar_raios,
    appendix_identity_check,
    erro_padrao,
    raios_por_iteracao,
    trace_gap_check,
)
from channel import amostrar_ruido, sample_channel, snr_to_n0, trial_rng
from constants import (
    COLUNAS_DIAGNOSTICO,
    COLUNAS_RAIO,
    COLUNAS_VARREDURA,
    DETECTORES_LINEARES,
    DETECTORES_SD,
    LIMITE_CONFERENCIA_ML,
    Detector,
    Esquema,
)
from constellation import Constellation, bit_errors, build_qam, random_symbols
from detect import (
    InverseProvider,
    erro_inversa,
    expected_bound_check,
    mmse_detect,
    quantized_equality,
    sufficient_condition_check,
    zf_detect,
)
from erros import ErroConfiguracao, ErroPrecondicao
from linalg import flops_gram, gram, qr_decompose
from sphere import SdConfig, brute_force_ml, sd_decode
from utils import SimConfig, exportar_tabela, metadados_config, tabela

logger = logging.getLogger(__name__)

_ESQUEMA_POR_DETECTOR = {
    Detector.SD_PROPOSTO.value: Esquema.PROPOSTO,
    Detector.SD_SE.value: Esquema.SE_SD,
    Detector.SD_FP.value: Esquema.FP_SD,
}


@dataclass(frozen=True)
class MetricsRecord:
    snr_db: float
    ber: float
    stderr_ber: float
    avg_nodes: float
    avg_flops: float
    trials: int


# ---------------------------------------------------------------------------
# Infraestrutura
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _constelacao(M: int, es: float) -> Constellation:
    return build_qam(M, es)


def _exigir_detector(cfg: SimConfig, permitidos: Sequence[str], varredura: str) -> None:
    if cfg.detector not in permitidos:
        raise ErroConfiguracao(
            f"Detector {cfg.detector!r} não se aplica à varredura {varredura} (use {', '.join(permitidos)})"
        )


def _exigir_iterativa(cfg: SimConfig, estudo: str) -> int:
    if cfg.inverse.is_exact:
        raise ErroConfiguracao(f"{estudo} exige inversa iterativa (newton:K, order3:K ou order7:K)")
    return cfg.inverse.order


def _mapear(funcao: Callable, cfg: SimConfig) -> List:
    """Aplica ``funcao(cfg, i)`` para i = 0..trials-1, preservando a ordem."""
    indices = range(cfg.trials)
    workers = min(cfg.workers, cfg.trials)
    if workers <= 1:
        return [funcao(cfg, i) for i in indices]
    lote = max(1, cfg.trials // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(funcao, repeat(cfg), indices, chunksize=lote))


def _realizacao(cfg: SimConfig, indice: int):
    """Canal, símbolos e ruído unitário da tentativa ``indice``."""
    rng = trial_rng(cfg.master_seed, indice)
    c = _constelacao(cfg.modulation, cfg.es)
    canal = sample_channel(rng, cfg.n_rx, cfg.n_users)
    x = random_symbols(rng, c, cfg.n_users)
    ruido = amostrar_ruido(rng, cfg.n_rx, 1.0)
    return c, canal.H, x, ruido


def _niveis_ruido(cfg: SimConfig) -> List[float]:
    return [snr_to_n0(snr, cfg.n_users, cfg.es) for snr in cfg.snr_db_list]


def _agregar_metricas(cfg: SimConfig, por_tentativa: List[np.ndarray]) -> List[MetricsRecord]:
    # por_tentativa[i][s] = (erros de bit, nós, flops, ...)
    dados = np.stack(por_tentativa)
    bits = cfg.n_users * _constelacao(cfg.modulation, cfg.es).bits_per_symbol
    registros = []
    for s, snr in enumerate(cfg.snr_db_list):
        fracoes = dados[:, s, 0] / bits
        registros.append(MetricsRecord(
            snr_db=float(snr),
            ber=float(np.mean(fracoes)),
            stderr_ber=erro_padrao(fracoes),
            avg_nodes=float(np.mean(dados[:, s, 1])),
            avg_flops=float(np.mean(dados[:, s, 2])),
            trials=cfg.trials,
        ))
    return registros


# ---------------------------------------------------------------------------
# Varredura linear (ZF / MMSE)
# ---------------------------------------------------------------------------

def _tentativa_linear(cfg: SimConfig, indice: int) -> np.ndarray:
    c, H, x, ruido = _realizacao(cfg, indice)
    limpo = H @ x
    resultado = np.zeros((len(cfg.snr_db_list), 3))
    for s, n0 in enumerate(_niveis_ruido(cfg)):
        y = limpo + np.sqrt(n0) * ruido
        if cfg.detector == Detector.MMSE.value:
            deteccao = mmse_detect(H, y, c, n0, cfg.es, cfg.inverse)
        else:
            deteccao = zf_detect(H, y, c, cfg.inverse)
        resultado[s] = (bit_errors(x, deteccao.hard, c), 0, deteccao.flops)
    return resultado


def run_linear_sweep(cfg: SimConfig) -> List[MetricsRecord]:
    """BER e flops médios por SNR para ZF ou MMSE com a inversa configurada."""
    _exigir_detector(cfg, DETECTORES_LINEARES, 'linear')
    logger.info(
        "Varredura linear %s %dx%d %d-QAM, inversa %s, %d tentativas, %d workers",
        cfg.detector, cfg.n_rx, cfg.n_users, cfg.modulation, cfg.inverse, cfg.trials, cfg.workers,
    )
    registros = _agregar_metricas(cfg, _mapear(_tentativa_linear, cfg))
    logger.info("Varredura linear concluída: %d pontos de SNR", len(registros))
    return registros


# ---------------------------------------------------------------------------
# Varredura de sphere decoder
# ---------------------------------------------------------------------------

def config_sd(cfg: SimConfig) -> SdConfig:
    return SdConfig(scheme=_ESQUEMA_POR_DETECTOR[cfg.detector], inverse=cfg.inverse)


def _conferir_ml(cfg: SimConfig) -> bool:
    return cfg.modulation ** cfg.n_users <= LIMITE_CONFERENCIA_ML


def _tentativa_sd(cfg: SimConfig, indice: int) -> np.ndarray:
    c, H, x, ruido = _realizacao(cfg, indice)
    sd_cfg = config_sd(cfg)
    C = gram(H)
    Q, R = qr_decompose(H)
    limpo = H @ x
    conferir = _conferir_ml(cfg)
    # colunas: erros de bit, nós, flops, divergências do ML, fallbacks
    resultado = np.zeros((len(cfg.snr_db_list), 5))
    for s, n0 in enumerate(_niveis_ruido(cfg)):
        y = limpo + np.sqrt(n0) * ruido
        z = Q.conj().T @ y
        x_hat, stats, flops = sd_decode(z, R, c, sd_cfg, C=C, g=H.conj().T @ y)
        divergente = 0
        if conferir:
            _, custo_ml = brute_force_ml(z, R, c)
            residuo = z - R @ x_hat
            custo = float(np.vdot(residuo, residuo).real)
            divergente = int(custo > custo_ml + 1e-9 * max(1.0, custo_ml))
        resultado[s] = (
            bit_errors(x, x_hat, c),
            stats.nodes_visited,
            flops_gram(cfg.n_rx, cfg.n_users) + flops,
            divergente,
            int(stats.fallback),
        )
    return resultado


def run_sd_sweep(cfg: SimConfig) -> List[MetricsRecord]:
    """BER e nós visitados médios por SNR para o esquema de SD configurado.

    Com M^K <= LIMITE_CONFERENCIA_ML cada decisão é conferida contra o ML
    exaustivo e as divergências são registradas no log.
    """
    _exigir_detector(cfg, DETECTORES_SD, 'sd')
    config_sd(cfg)
    logger.info(
        "Varredura SD %s %dx%d %d-QAM, inversa %s, %d tentativas, %d workers",
        cfg.detector, cfg.n_rx, cfg.n_users, cfg.modulation, cfg.inverse, cfg.trials, cfg.workers,
    )
    por_tentativa = _mapear(_tentativa_sd, cfg)
    dados = np.stack(por_tentativa)
    for s, snr in enumerate(cfg.snr_db_list):
        fallbacks = int(dados[:, s, 4].sum())
        if fallbacks:
            logger.warning("SNR %.4g dB: %d fallbacks do SD proposto", snr, fallbacks)
        if _conferir_ml(cfg):
            divergencias = int(dados[:, s, 3].sum())
            nivel = logging.WARNING if divergencias else logging.INFO
            logger.log(nivel, "SNR %.4g dB: %d de %d decisões divergem do ML", snr, divergencias, cfg.trials)
    registros = _agregar_metricas(cfg, por_tentativa)
    logger.info("Varredura SD concluída: %d pontos de SNR", len(registros))
    return registros


# ---------------------------------------------------------------------------
# Estudo do raio por iteração
# ---------------------------------------------------------------------------

def _tentativa_raio(cfg: SimConfig, indice: int):
    c, H, x, ruido = _realizacao(cfg, indice)
    n0 = _niveis_ruido(cfg)[0]
    y = H @ x + np.sqrt(n0) * ruido
    return raios_por_iteracao(H, y, c, cfg.inverse.order, cfg.k_list)


def run_radius_study(cfg: SimConfig) -> List[RadiusStudyRecord]:
    """Médias de r_k² e r_e² por k (primeiro ponto de SNR da configuração)."""
    _exigir_iterativa(cfg, 'Estudo do raio')
    if len(cfg.snr_db_list) > 1:
        logger.warning("Estudo do raio usa só o primeiro SNR (%.4g dB)", cfg.snr_db_list[0])
    if not cfg.k_list:
        return []
    resultados = _mapear(_tentativa_raio, cfg)
    r_e_sq = [r_e for r_e, _ in resultados]
    por_tentativa = [por_k for _, por_k in resultados]
    return agregar_raios(cfg.k_list, r_e_sq, por_tentativa)


def linhas_raio(registros: Sequence[RadiusStudyRecord]) -> List[Dict]:
    return [
        {
            'k': r.k,
            'mean_rk_sq': r.mean_r_sq,
            'stderr': r.stderr_r_sq,
            'mean_re_sq': r.mean_r_e_sq,
            'trace_sk': r.trace_s_k,
            'trials': r.trials,
        }
        for r in registros
    ]


# ---------------------------------------------------------------------------
# Diagnósticos por k
# ---------------------------------------------------------------------------

def _tentativa_diagnostico(cfg: SimConfig, indice: int) -> np.ndarray:
    c, H, x, ruido = _realizacao(cfg, indice)
    n0 = _niveis_ruido(cfg)[0]
    y = H @ x + np.sqrt(n0) * ruido
    ordem = cfg.inverse.order
    zf_exato = zf_detect(H, y, c, InverseProvider.exact())
    C = gram(H)

    # colunas: identidade, igualdade quantizada, condição suficiente,
    # violação da implicação, violação do limite esperado
    resultado = np.zeros((len(cfg.k_list), 5))
    for linha, k in enumerate(cfg.k_list):
        E, estado = erro_inversa(C, ordem, k)
        igual = quantized_equality(H, y, c, ordem, k)
        suficiente = sufficient_condition_check(zf_exato, E, zf_exato.g, c.d_min)
        limite = expected_bound_check(estado.residual, x, c.d_min)
        resultado[linha] = (
            appendix_identity_check(H, y, c, ordem, k),
            igual,
            suficiente,
            suficiente and not igual,
            not (limite.re_ok and limite.im_ok),
        )
    return resultado


def _lacuna_traco(cfg: SimConfig, k: int) -> Dict[str, float]:
    # canal fixo e sorteios próprios, fora da faixa de índices das tentativas
    c = _constelacao(cfg.modulation, cfg.es)
    H = sample_channel(trial_rng(cfg.master_seed, cfg.trials), cfg.n_rx, cfg.n_users).H
    rng = trial_rng(cfg.master_seed, cfg.trials + 1 + k)
    try:
        lacuna = trace_gap_check(H, c, _niveis_ruido(cfg)[0], cfg.inverse.order, k, cfg.trials, rng)
    except ErroPrecondicao as e:
        logger.info("Lacuna de traço omitida para k = %d: %s", k, e)
        return {'trace_gap_lhs': np.nan, 'trace_gap_rhs': np.nan, 'trace_gap_stderr': np.nan}
    return {
        'trace_gap_lhs': lacuna.lhs,
        'trace_gap_rhs': lacuna.rhs,
        'trace_gap_stderr': lacuna.stderr,
    }


def run_diagnostics(cfg: SimConfig) -> List[Dict]:
    """Uma linha por k com as taxas dos diagnósticos de tolerância e do raio."""
    _exigir_iterativa(cfg, 'Diagnóstico')
    if not cfg.k_list:
        return []
    dados = np.stack(_mapear(_tentativa_diagnostico, cfg))
    linhas = []
    for linha, k in enumerate(cfg.k_list):
        violacoes = int(dados[:, linha, 3].sum())
        if violacoes:
            logger.error("k = %d: condição suficiente sem igualdade quantizada em %d casos", k, violacoes)
        linhas.append({
            'k': int(k),
            'identity_max_rel': float(dados[:, linha, 0].max()),
            'quantized_equality_rate': float(dados[:, linha, 1].mean()),
            'sufficient_rate': float(dados[:, linha, 2].mean()),
            'implication_violations': violacoes,
            'bound_violation_rate': float(dados[:, linha, 4].mean()),
            **_lacuna_traco(cfg, k),
            'trials': cfg.trials,
        })
    return linhas


# ---------------------------------------------------------------------------
# Exportação
# ---------------------------------------------------------------------------

_COLUNAS_POR_TIPO = {
    'linear': COLUNAS_VARREDURA,
    'sd': COLUNAS_VARREDURA,
    'radius': COLUNAS_RAIO,
    'diag': COLUNAS_DIAGNOSTICO,
}


def executar(tipo: str, cfg: SimConfig) -> List[Dict]:
    """Roda a varredura ``tipo`` e devolve as linhas da tabela."""
    if tipo == 'linear':
        return [asdict(r) for r in run_linear_sweep(cfg)]
    if tipo == 'sd':
        return [asdict(r) for r in run_sd_sweep(cfg)]
    if tipo == 'radius':
        return linhas_raio(run_radius_study(cfg))
    if tipo == 'diag':
        return run_diagnostics(cfg)
    raise ErroConfiguracao(f"Tipo de varredura desconhecido: {tipo!r}")


def executar_e_exportar(tipo: str, cfg: SimConfig, saida, parquet: bool = False, **extras) -> Dict:
    """Roda, grava a tabela e devolve um resumo (arquivo, linhas, registros)."""
    linhas = executar(tipo, cfg)
    df = tabela(linhas, _COLUNAS_POR_TIPO[tipo])
    meta = metadados_config(cfg, varredura=tipo, colunas=list(df.columns), **extras)
    if tipo == 'sd':
        meta['esquema'] = config_sd(cfg).scheme.value
    arquivos = exportar_tabela(df, Path(saida), meta, parquet=parquet)
    return {'arquivo': str(arquivos[0]), 'arquivos': [str(a) for a in arquivos],
            'linhas': len(df), 'registros': linhas}


def razao_nos(proposto: Sequence[Dict], referencia: Sequence[Dict]) -> List[tuple]:
    """(snr_db, avg_nodes proposto / avg_nodes referência) por ponto de SNR."""
    razoes = []
    for p, r in zip(proposto, referencia):
        razao = p['avg_nodes'] / r['avg_nodes'] if r['avg_nodes'] > 0 else float('nan')
        razoes.append((p['snr_db'], razao))
    return razoes


def comparar_ber(a: Sequence[Dict], b: Sequence[Dict], sigmas: float = 2.0) -> List[tuple]:
    """(snr_db, |Δber|, limite, dentro) com limite = sigmas·√(se_a² + se_b²)."""
    comparacoes = []
    for ra, rb in zip(a, b):
        diferenca = abs(ra['ber'] - rb['ber'])
        limite = sigmas * float(np.hypot(ra['stderr_ber'], rb['stderr_ber']))
        comparacoes.append((ra['snr_db'], diferenca, limite, diferenca <= limite))
    return comparacoes
