#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Flow Prefect - Cenários de referência do simulador MIMO

Executa os cenários de ``constants.PREDEFINICOES`` e consolida as
comparações pedidas em cada um:
  - raio: r_k² crescente em k e abaixo de r_e² (bandas de 2 erros-padrão)
  - linear: BER com Newton k=3,5,7 vs exata (2 erros-padrão combinados)
  - sd: razão de nós do proposto vs SE-SD e FP-SD e concordância de BER

Deployments são gerenciados pelo prefect.yaml na raiz do projeto.

Execução manual:
  python flows.py --run-once                         # todos os cenários
  python flows.py --run-once --cenario sd_32x8 --trials 200
"""

import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv

project_root = Path(__file__).parent.parent.parent
load_dotenv(dotenv_path=project_root / '.env')

# Desenvolvimento local sem servidor: PREFECT_USE_EPHEMERAL=1
if (os.getenv("PREFECT_USE_EPHEMERAL") or "").strip().lower() in ("1", "true", "yes"):
    os.environ["PREFECT_API_URL"] = ""
    os.environ["PREFECT_SERVER_ALLOW_EPHEMERAL_MODE"] = "true"

from prefect import flow

sys.path.insert(0, str(Path(__file__).parent))

from constants import ESQUEMAS_CLI, PREDEFINICOES
from harness import comparar_ber, razao_nos
from tasks import diagnosticos, estudo_raio, varredura_linear, varredura_sd
from utils import diretorio_exports

LIMITE_RAZAO_NOS = 0.8


def _parametros(base: Dict, trials: Optional[int], workers: Optional[int], **extras) -> Dict:
    parametros = dict(base, **extras)
    if trials:
        parametros['trials'] = trials
    if workers:
        parametros['workers'] = workers
    return parametros


def avaliar_raio(registros: List[Dict]) -> List[str]:
    """Avisos quando r_k² não cresce com k ou não fica abaixo de r_e² (2 erros-padrão)."""
    avisos = []
    for anterior, atual in zip(registros, registros[1:]):
        if atual['mean_rk_sq'] < anterior['mean_rk_sq'] - 2 * max(atual['stderr'], anterior['stderr']):
            avisos.append(f"r_k² decresce de k={anterior['k']} para k={atual['k']}")
    for r in registros:
        if r['mean_rk_sq'] > r['mean_re_sq'] + 2 * r['stderr']:
            avisos.append(f"r_k² acima de r_e² em k={r['k']}")
    return avisos


def _cenario_raio(nome: str, base: Dict, pasta: Path, trials, workers) -> Dict:
    resultado = estudo_raio(_parametros(base, trials, workers), str(pasta / f"{nome}.csv"))
    avisos = avaliar_raio(resultado['registros']) if resultado['sucesso'] else []
    for aviso in avisos:
        print(f"   ⚠️  {aviso}")
    return {'resultados': {'raio': resultado}, 'avisos': avisos}


def variantes_inversa(base: Dict) -> List[str]:
    """Inversas iterativas do cenário: uma por k em ``k_variantes``, ou a configurada."""
    if base.get('k_variantes'):
        return [f"newton:{k}" for k in sorted(base['k_variantes'])]
    return [base['inverse']]


def _cenario_linear(nome: str, base: Dict, pasta: Path, trials, workers) -> Dict:
    exata = varredura_linear(
        _parametros(base, trials, workers, inverse='exact'), str(pasta / f"{nome}_exata.csv"),
    )
    resultados = {'exata': exata}
    avisos = []
    variantes = variantes_inversa(base)
    for inversa in variantes:
        caminho = pasta / f"{nome}_{inversa.replace(':', '')}.csv"
        resultados[inversa] = varredura_linear(_parametros(base, trials, workers, inverse=inversa), str(caminho))
        if not (resultados[inversa]['sucesso'] and exata['sucesso']):
            continue
        for snr, diferenca, limite, dentro in comparar_ber(resultados[inversa]['registros'], exata['registros']):
            print(f"   📊 {inversa} {snr:g} dB: |ΔBER| = {diferenca:.3e} (limite {limite:.3e})")
            # k pequenos ficam acima da exata por construção; só o maior é cobrado
            if not dentro and inversa == variantes[-1]:
                avisos.append(f"{nome}: BER {inversa} ≠ exata em {snr:g} dB")
    return {'resultados': resultados, 'avisos': avisos}


def _cenario_sd(nome: str, base: Dict, pasta: Path, trials, workers) -> Dict:
    resultados = {}
    for esquema in base.get('schemes', ESQUEMAS_CLI):
        parametros = _parametros(base, trials, workers, scheme=esquema)
        resultados[esquema] = varredura_sd(parametros, str(pasta / f"{nome}_{esquema}.csv"))

    avisos = []
    if all(r['sucesso'] for r in resultados.values()) and 'proposed' in resultados:
        proposto = resultados['proposed']['registros']
        for referencia in (e for e in resultados if e != 'proposed'):
            for snr, razao in razao_nos(proposto, resultados[referencia]['registros']):
                print(f"   📊 {snr:g} dB: nós proposto/{referencia} = {razao:.3f}")
                if not razao <= LIMITE_RAZAO_NOS:
                    avisos.append(f"{nome}: razão de nós vs {referencia} = {razao:.3f} em {snr:g} dB")
            for snr, _, _, dentro in comparar_ber(proposto, resultados[referencia]['registros']):
                if not dentro:
                    avisos.append(f"{nome}: BER proposto ≠ {referencia} em {snr:g} dB")
    return {'resultados': resultados, 'avisos': avisos}


_EXECUTORES = {
    'radius': _cenario_raio,
    'linear': _cenario_linear,
    'sd': _cenario_sd,
}


@flow(name="Simulação MIMO - Cenários de Referência", log_prints=True)
def cenarios_referencia_flow(
    cenarios: Optional[List[str]] = None,
    trials: Optional[int] = None,
    workers: Optional[int] = None,
    saida_dir: Optional[str] = None,
) -> dict:
    """Roda os cenários pedidos (todos por padrão) e consolida avisos e erros."""
    print("=" * 80)
    print("🧮 SIMULAÇÃO MIMO - CENÁRIOS DE REFERÊNCIA")
    print("=" * 80)
    print(f"⏰ Início: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print()

    nomes = cenarios or list(PREDEFINICOES)
    desconhecidos = [n for n in nomes if n not in PREDEFINICOES]
    if desconhecidos:
        print(f"❌ Cenários desconhecidos: {', '.join(desconhecidos)}")
        return {
            'sucesso': False,
            'mensagem': f"Cenários desconhecidos: {desconhecidos}",
            'timestamp': datetime.now().isoformat(),
        }

    pasta = Path(saida_dir) if saida_dir else diretorio_exports()
    resultados, erros, avisos = {}, [], []
    for nome in nomes:
        base = PREDEFINICOES[nome]
        print(f"📦 Cenário {nome} ({base['subcomando']})...")
        saida = _EXECUTORES[base['subcomando']](nome, base, pasta, trials, workers)
        resultados[nome] = saida['resultados']
        avisos.extend(saida['avisos'])
        erros.extend(
            f"{nome}/{variante}: {r['mensagem']}"
            for variante, r in saida['resultados'].items() if not r['sucesso']
        )
        print()

    # diagnósticos no primeiro cenário linear, quando pedido
    lineares = [n for n in nomes if PREDEFINICOES[n]['subcomando'] == 'linear']
    if lineares:
        base = PREDEFINICOES[lineares[0]]
        parametros = _parametros(base, min(trials or 1000, 1000), workers, detector='zf', k_list=[3, 5, 7])
        diag = diagnosticos(parametros, str(pasta / f"{lineares[0]}_diagnosticos.csv"))
        resultados['diagnosticos'] = diag
        if not diag['sucesso']:
            erros.append(f"diagnosticos: {diag['mensagem']}")
        elif any(linha['implication_violations'] for linha in diag['registros']):
            erros.append("diagnosticos: condição suficiente sem igualdade quantizada")

    print("=" * 80)
    if not erros and not avisos:
        print("✅ CENÁRIOS CONCLUÍDOS COM SUCESSO")
    elif not erros:
        print("⚠️  CENÁRIOS CONCLUÍDOS COM AVISOS")
        for aviso in avisos:
            print(f"   - {aviso}")
    else:
        print("❌ CENÁRIOS COM ERROS")
        for erro in erros:
            print(f"   - {erro}")
    print("=" * 80)
    print(f"⏰ Fim: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")

    return {
        'sucesso': not erros,
        'resultados': resultados,
        'erros': erros,
        'avisos': avisos,
        'timestamp': datetime.now().isoformat(),
    }


# ---------------------------------------------------------------------------
# Execução manual
# ---------------------------------------------------------------------------

if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description='Execução manual dos cenários de referência')
    parser.add_argument('--run-once', action='store_true',
                        help='Executa o flow uma vez sem criar deployment')
    parser.add_argument('--cenario', action='append', choices=list(PREDEFINICOES),
                        help='Cenário a executar (repetível; padrão: todos)')
    parser.add_argument('--trials', type=int, help='Sobrescreve as tentativas de cada cenário')
    parser.add_argument('--workers', type=int, help='Processos por varredura')
    args = parser.parse_args()

    if args.run_once:
        print("🔄 Executando cenários de referência (--run-once)...")
        resultado = cenarios_referencia_flow(args.cenario, args.trials, args.workers)
        sys.exit(0 if resultado.get('sucesso', False) else 1)
    else:
        cenarios_referencia_flow.serve(
            name="simulacao-mimo-cenarios",
            description="Cenários de referência do simulador MIMO (sob demanda)",
        )
