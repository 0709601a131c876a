#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Constantes e configurações compartilhadas pelo simulador de detecção MIMO.

Centraliza tolerâncias numéricas, colunas dos CSVs, códigos de saída e os
cenários de referência para evitar repetição entre harness.py,
simular.py, tasks.py e flows.py.
"""

from enum import Enum
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent.parent.parent

# ---------------------------------------------------------------------------
# Constelação
# ---------------------------------------------------------------------------

MODULACOES_SUPORTADAS = (4, 16, 64)
ENERGIA_SIMBOLO_PADRAO = 1.0

# ---------------------------------------------------------------------------
# Inversão iterativa
# ---------------------------------------------------------------------------

ORDENS_ITERATIVAS = (2, 3, 7)
DELTA_SALVAGUARDA = 1e-6          # margem sobre lambda_upper (K = 2 é marginal sem ela)
TOLERANCIA_TRACO_NEGATIVO = 1e-12
PASSOS_DIVERGENCIA = 2            # crescimentos seguidos de ||S_k||_F até abortar
PISO_DIVERGENCIA = 1e-8          # abaixo disso ||S_k||_F é ruído de arredondamento
TOLERANCIA_POSTO = 1e-12          # |r_ii| < tol * ||H||_F => posto deficiente

# ---------------------------------------------------------------------------
# Sphere decoder
# ---------------------------------------------------------------------------

LIMITE_FORCA_BRUTA = 10 ** 6      # M^K máximo aceito pelo oráculo exaustivo
FOLGA_RELATIVA_RAIO = 1e-9        # folga do raio inicial: ponto de Babai na fronteira
FOLGA_ABSOLUTA_RAIO = 1e-12
# r_k² até 0,1% abaixo do custo da folha de Babai conta como empate (C_k quase convergida)
TOLERANCIA_EMPATE_RAIO = 1e-3
TAMANHO_LOTE_FORCA_BRUTA = 65_536
LIMITE_CONFERENCIA_ML = 4096       # M^K até onde a varredura SD confere contra o ML exaustivo


class Esquema(str, Enum):
    PROPOSTO = 'proposed'
    SE_SD = 'se_sd'
    FP_SD = 'fp_sd'
    FORCA_BRUTA = 'brute_force'


class ModoRaio(str, Enum):
    BABAI_APROX = 'babai_approx'
    BABAI_EXATO = 'babai_exact'
    INFINITO = 'infinite'
    FIXO = 'fixed'


# ---------------------------------------------------------------------------
# Análise
# ---------------------------------------------------------------------------

LIMITE_RESIDUO_TRACO = 0.05       # ||S_k||_F abaixo disso para o desprezo do termo quadrático

# ---------------------------------------------------------------------------
# Harness / CLI
# ---------------------------------------------------------------------------

class Detector(str, Enum):
    ZF = 'zf'
    MMSE = 'mmse'
    SD_PROPOSTO = 'sd_proposed'
    SD_SE = 'sd_se'
    SD_FP = 'sd_fp'


DETECTORES_LINEARES = (Detector.ZF.value, Detector.MMSE.value)
DETECTORES_SD = (Detector.SD_PROPOSTO.value, Detector.SD_SE.value, Detector.SD_FP.value)

# --scheme da CLI -> detector
ESQUEMAS_CLI = {
    'proposed': Detector.SD_PROPOSTO.value,
    'se': Detector.SD_SE.value,
    'fp': Detector.SD_FP.value,
}

COLUNAS_VARREDURA = ['snr_db', 'ber', 'stderr_ber', 'avg_nodes', 'avg_flops', 'trials']
COLUNAS_RAIO = ['k', 'mean_rk_sq', 'stderr', 'mean_re_sq', 'trace_sk', 'trials']
COLUNAS_DIAGNOSTICO = [
    'k',
    'identity_max_rel',
    'quantized_equality_rate',
    'sufficient_rate',
    'implication_violations',
    'bound_violation_rate',
    'trace_gap_lhs',
    'trace_gap_rhs',
    'trace_gap_stderr',
    'trials',
]

FORMATO_FLOAT_CSV = '%.9g'
CONVENCAO_SNR = 'K*Es/N0 (dB), SNR por antena receptora'
VERSAO_FORMATO = 1

SAIDA_SUCESSO = 0
SAIDA_CONFIGURACAO = 2
SAIDA_NUMERICA = 3

# chaves do arquivo de configuração que não entram no SimConfig
CHAVES_SAIDA = ('out', 'parquet', 'log_format')

DIRETORIO_EXPORTS_PADRAO = PROJECT_ROOT / 'exports'

# ---------------------------------------------------------------------------
# Cenários de referência em escala de mesa
#
# Grades de SNR e contagens de tentativas escolhidas para rodar em minutos
# numa estação comum.
# ---------------------------------------------------------------------------

PREDEFINICOES = {
    'raio_16x16': {
        'subcomando': 'radius',
        'n': 16, 'k_users': 16, 'mod': 4,
        'snr': [10.0], 'trials': 2000,
        'inverse': 'newton:7', 'k_list': [1, 2, 3, 4, 5, 6, 7],
    },
    'mmse_128x8': {
        'subcomando': 'linear', 'detector': 'mmse',
        'n': 128, 'k_users': 8, 'mod': 16,
        'snr': [0.0, 2.0, 4.0], 'trials': 10_000,
        'inverse': 'newton:7',
        'k_variantes': [3, 5, 7],
    },
    'zf_128x8': {
        'subcomando': 'linear', 'detector': 'zf',
        'n': 128, 'k_users': 8, 'mod': 16,
        'snr': [0.0, 2.0, 4.0], 'trials': 10_000,
        'inverse': 'newton:7',
        'k_variantes': [3, 5, 7],
    },
    'sd_16x16': {
        'subcomando': 'sd', 'schemes': ['proposed', 'se', 'fp'],
        'n': 16, 'k_users': 16, 'mod': 4,
        'snr': [8.0, 10.0, 12.0], 'trials': 1000,
        'inverse': 'newton:7',
    },
    'sd_32x8': {
        'subcomando': 'sd', 'schemes': ['proposed', 'se', 'fp'],
        'n': 32, 'k_users': 8, 'mod': 4,
        'snr': [0.0, 4.0, 8.0], 'trials': 1000,
        'inverse': 'newton:7',
    },
}
