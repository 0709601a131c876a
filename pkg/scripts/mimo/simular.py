#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
🧮 SIMULADOR DE DETECÇÃO MIMO COM INVERSA APROXIMADA

═══════════════════════════════════════════════════════════════════════════
🎯 PROPÓSITO:
═══════════════════════════════════════════════════════════════════════════

Roda as varreduras Monte Carlo e grava uma tabela CSV por execução:

  linear  BER / flops de ZF ou MMSE com inversa exata ou iterativa
  sd      BER / nós visitados do SD proposto, SE-SD ou FP-SD
  radius  raio de Babai aproximado r_k² por iteração k
  diag    diagnósticos de tolerância ao erro da inversa por k

═══════════════════════════════════════════════════════════════════════════
🚀 COMO USAR:
═══════════════════════════════════════════════════════════════════════════

  python simular.py linear --n 128 --k-users 8 --mod 16 --snr 0,2,4 \\
      --trials 10000 --detector zf --inverse newton:7
  python simular.py sd --n 16 --k-users 16 --mod 4 --snr 8,10,12 \\
      --trials 1000 --scheme proposed --inverse newton:7
  python simular.py sd ... --comparar          # os três esquemas + razão de nós
  python simular.py radius --n 16 --k-users 16 --snr 10 --trials 2000 --k-list 1,2,3,4,5,6,7
  python simular.py diag --n 32 --k-users 4 --snr 10 --trials 1000 --inverse newton:8
  python simular.py linear --config minha_config.txt --snr 10   # flags sobrepõem o arquivo

Precedência: flags > arquivo (--config, chave = valor) > .env (MIMO_*) > padrões.
O arquivo aceita também out, parquet e log_format.

Códigos de saída: 0 sucesso; 2 erro de configuração; 3 falha numérica.
═══════════════════════════════════════════════════════════════════════════
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

sys.path.insert(0, str(Path(__file__).parent))

from constants import (
    DETECTORES_LINEARES,
    ESQUEMAS_CLI,
    SAIDA_CONFIGURACAO,
    SAIDA_NUMERICA,
    SAIDA_SUCESSO,
)
from erros import ErroConfiguracao, ErroDimensao, ErroDominio, ErroNumerico
from harness import executar_e_exportar, razao_nos
from utils import (
    SimConfig,
    carregar_ambiente,
    configurar_logs,
    diretorio_exports,
    ler_arquivo_config,
    montar_config,
    opcoes_saida,
    tabela,
)

_CHAVES_CONFIG = (
    'n', 'k_users', 'mod', 'snr', 'trials', 'seed',
    'inverse', 'workers', 'detector', 'scheme', 'k_list',
)


def criar_parser() -> argparse.ArgumentParser:
    comum = argparse.ArgumentParser(add_help=False)
    comum.add_argument('--n', type=int, help='Antenas receptoras N')
    comum.add_argument('--k-users', type=int, help='Usuários K')
    comum.add_argument('--mod', type=int, help='Ordem da QAM (4, 16, 64)')
    comum.add_argument('--snr', type=str, help='Lista de SNR em dB separada por vírgulas (K·Es/N0)')
    comum.add_argument('--trials', type=int, help='Tentativas Monte Carlo por ponto')
    comum.add_argument('--seed', type=int, help='Semente mestre')
    comum.add_argument('--inverse', type=str, help='exact | newton:K | order3:K | order7:K')
    comum.add_argument('--workers', type=int, help='Processos (padrão: MIMO_WORKERS ou núcleos físicos)')
    comum.add_argument('--out', type=str, help='CSV de saída (padrão: exports/<varredura>_...csv)')
    comum.add_argument('--config', type=str, help='Arquivo chave = valor com os mesmos nomes das flags')
    comum.add_argument('--parquet', action='store_true', help='Grava também uma cópia Parquet')
    comum.add_argument('--log-format', choices=('texto', 'json'), help='Formato dos logs')

    parser = argparse.ArgumentParser(description='Simulador de detecção MIMO com inversa aproximada')
    sub = parser.add_subparsers(dest='varredura', required=True)

    linear = sub.add_parser('linear', parents=[comum], help='ZF / MMSE')
    linear.add_argument('--detector', choices=DETECTORES_LINEARES, help='Detector linear (padrão: zf)')

    sd = sub.add_parser('sd', parents=[comum], help='Sphere decoders')
    sd.add_argument('--scheme', choices=tuple(ESQUEMAS_CLI), help='Esquema (padrão: proposed)')
    sd.add_argument('--comparar', action='store_true',
                    help='Roda os três esquemas e informa a razão de nós do proposto')

    for nome, ajuda in (('radius', 'Estudo do raio por iteração'), ('diag', 'Diagnósticos por k')):
        p = sub.add_parser(nome, parents=[comum], help=ajuda)
        p.add_argument('--k-list', type=str, help='Iterações k separadas por vírgulas (padrão: 1..K da inversa)')

    return parser


def _flags(args: argparse.Namespace) -> Dict:
    return {chave: getattr(args, chave, None) for chave in _CHAVES_CONFIG}


def _padroes(varredura: str) -> Dict:
    if varredura == 'sd':
        return {'detector': 'sd_proposed', 'inverse': 'newton:7'}
    if varredura in ('radius', 'diag'):
        return {'inverse': 'newton:7'}
    return {}


def _completar_k_list(cfg: SimConfig, args: argparse.Namespace) -> SimConfig:
    if args.varredura not in ('radius', 'diag') or args.k_list is not None or cfg.k_list:
        return cfg
    if args.config and 'k_list' in ler_arquivo_config(args.config):
        return cfg
    return replace(cfg, k_list=tuple(range(1, cfg.inverse.k + 1)))


def _saida(args: argparse.Namespace, opcoes: Dict, cfg: SimConfig, sufixo: str = '') -> Path:
    if opcoes['out']:
        saida = Path(opcoes['out'])
        return saida.with_name(f"{saida.stem}{sufixo}{saida.suffix or '.csv'}") if sufixo else saida
    nome = f"{args.varredura}_{cfg.detector}_{cfg.n_rx}x{cfg.n_users}_{cfg.modulation}qam{sufixo}.csv"
    return diretorio_exports() / nome


def _imprimir_resumo(resumo: Dict) -> None:
    print(f"💾 Arquivo: {resumo['arquivo']} ({resumo['linhas']} linhas)")
    if resumo['registros']:
        print(tabela(resumo["registros"], list(resumo["registros"][0])).to_string(index=False))


def _executar(args: argparse.Namespace, opcoes: Dict) -> int:
    cfg = montar_config(_flags(args), arquivo=args.config, padroes=_padroes(args.varredura))
    cfg = _completar_k_list(cfg, args)

    print("=" * 80)
    print(f"🧮 SIMULAÇÃO {args.varredura.upper()} - {cfg.n_rx}x{cfg.n_users}, {cfg.modulation}-QAM")
    print("=" * 80)
    print(f"   Detector: {cfg.detector} | Inversa: {cfg.inverse} | Tentativas: {cfg.trials:,}")
    print(f"   SNR (dB): {', '.join(f'{s:g}' for s in cfg.snr_db_list)} | Semente: {cfg.master_seed}"
          f" | Workers: {cfg.workers}")
    print()

    if args.varredura == 'sd' and getattr(args, 'comparar', False):
        resumos = {}
        for esquema, detector in ESQUEMAS_CLI.items():
            cfg_esquema = replace(cfg, detector=detector)
            print(f"📦 Esquema {esquema}...")
            resumos[esquema] = executar_e_exportar(
                'sd', cfg_esquema, _saida(args, opcoes, cfg_esquema, f'_{esquema}'), parquet=opcoes['parquet'],
            )
            _imprimir_resumo(resumos[esquema])
            print()
        print("📊 Razão de nós visitados (proposto / referência):")
        for referencia in ('se', 'fp'):
            razoes = razao_nos(resumos['proposed']['registros'], resumos[referencia]['registros'])
            texto = ', '.join(f"{snr:g} dB: {r:.3f}" for snr, r in razoes)
            print(f"   vs {referencia}: {texto}")
    else:
        resumo = executar_e_exportar(args.varredura, cfg, _saida(args, opcoes, cfg), parquet=opcoes['parquet'])
        _imprimir_resumo(resumo)

    print()
    print("✅ SIMULAÇÃO CONCLUÍDA")
    print("=" * 80)
    return SAIDA_SUCESSO


def main(argv: Optional[List[str]] = None) -> int:
    args = criar_parser().parse_args(argv)
    carregar_ambiente()
    try:
        opcoes = opcoes_saida(
            {'out': args.out, 'parquet': args.parquet, 'log_format': args.log_format}, args.config,
        )
        configurar_logs(opcoes['log_format'])
        return _executar(args, opcoes)
    except (ErroConfiguracao, ErroDimensao, ErroDominio) as e:
        print(f"❌ Erro de configuração: {e}", file=sys.stderr)
        return SAIDA_CONFIGURACAO
    except ErroNumerico as e:
        print(f"❌ Falha numérica ({type(e).__name__}): {e}", file=sys.stderr)
        return SAIDA_NUMERICA


if __name__ == '__main__':
    sys.exit(main())
