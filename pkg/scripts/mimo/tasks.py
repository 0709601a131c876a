#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Tasks Prefect das varreduras Monte Carlo.

Cada task recebe um dicionário de parâmetros com os nomes das flags da CLI
(n, k_users, mod, snr, trials, seed, inverse, detector, k_list, workers),
grava a tabela e devolve um resumo padronizado:

  {'sucesso', 'arquivo', 'linhas', 'registros', 'mensagem'}

Erros do simulador não derrubam o flow: voltam como ``sucesso=False``.
"""

import traceback
from pathlib import Path
from typing import Dict, Optional

from prefect import task

from erros import ErroMimo
from harness import executar_e_exportar
from utils import carregar_ambiente, descrever_erro, diretorio_exports, montar_config

_CHAVES_NAO_CONFIG = ('subcomando', 'schemes', 'k_variantes')


def _parametros_config(parametros: Dict) -> Dict:
    return {chave: valor for chave, valor in parametros.items() if chave not in _CHAVES_NAO_CONFIG}


def executar_varredura(tipo: str, parametros: Dict, saida: Optional[str] = None, parquet: bool = False) -> Dict:
    """Núcleo comum das tasks (chamável sem Prefect)."""
    carregar_ambiente()
    try:
        cfg = montar_config(_parametros_config(parametros))
        caminho = Path(saida) if saida else (
            diretorio_exports() / f"{tipo}_{cfg.detector}_{cfg.n_rx}x{cfg.n_users}_{cfg.modulation}qam.csv"
        )
        resumo = executar_e_exportar(tipo, cfg, caminho, parquet=parquet)
        print(f"✅ {tipo}: {resumo['linhas']} linhas em {resumo['arquivo']}")
        return {
            'sucesso': True,
            'arquivo': resumo['arquivo'],
            'linhas': resumo['linhas'],
            'registros': resumo['registros'],
            'mensagem': 'OK',
        }
    except ErroMimo as e:
        print(f"❌ Varredura {tipo} falhou: {descrever_erro(e)}")
        return {'sucesso': False, 'arquivo': None, 'linhas': 0, 'registros': [], 'mensagem': descrever_erro(e)}
    except Exception as e:
        print(f"❌ Erro inesperado na varredura {tipo}: {e}")
        traceback.print_exc()
        return {'sucesso': False, 'arquivo': None, 'linhas': 0, 'registros': [], 'mensagem': repr(e)}


@task(name="Varredura Linear (ZF/MMSE)", log_prints=True)
def varredura_linear(parametros: Dict, saida: Optional[str] = None, parquet: bool = False) -> Dict:
    """BER e flops por SNR de um detector linear."""
    return executar_varredura('linear', parametros, saida, parquet)


@task(name="Varredura Sphere Decoder", log_prints=True)
def varredura_sd(parametros: Dict, saida: Optional[str] = None, parquet: bool = False) -> Dict:
    """BER e nós visitados por SNR de um esquema de SD."""
    return executar_varredura('sd', parametros, saida, parquet)


@task(name="Estudo do Raio de Babai", log_prints=True)
def estudo_raio(parametros: Dict, saida: Optional[str] = None, parquet: bool = False) -> Dict:
    return executar_varredura('radius', parametros, saida, parquet)


@task(name="Diagnósticos da Inversa Aproximada", log_prints=True)
def diagnosticos(parametros: Dict, saida: Optional[str] = None, parquet: bool = False) -> Dict:
    return executar_varredura('diag', parametros, saida, parquet)
