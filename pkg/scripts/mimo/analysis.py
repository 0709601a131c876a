#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Verificação numérica da lacuna entre os raios de Babai exato (r_e) e
aproximado (r_k), da identidade algébrica que a sustenta e do estudo do
raio por iteração.

Convenção dos raios nesta análise: os dois usam o mesmo
x_ZF = ⌈C⁻¹g⌋, ou seja r_e² = ||R(x_ZF - C⁻¹g)||² e
r_k² = ||R(x_ZF - C_k g)||². O sphere decoder usa ⌈C_k g⌋ no lugar de x_ZF.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from channel import sample_channel, transmit
from constants import LIMITE_RESIDUO_TRACO
from constellation import Constellation, quantize, random_symbols
from erros import ErroConfiguracao, ErroPrecondicao
from linalg import approx_inverse, estados_inversa, exact_inverse, gram, qr_decompose
from sphere import babai_radius_sq

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RadiusStudyRecord:
    k: int
    mean_r_sq: float
    stderr_r_sq: float
    mean_r_e_sq: float
    trace_s_k: float    # média de Re Tr(S_k)
    trials: int


class ResultadoTraco(NamedTuple):
    lhs: float      # média de r_e² - r_k²
    rhs: float      # 2·N₀·Re Tr(S_k)
    stderr: float   # erro-padrão de lhs
    trials: int


def erro_padrao(amostras) -> float:
    amostras = np.asarray(amostras, dtype=float)
    if amostras.size < 2:
        return 0.0
    return float(np.std(amostras, ddof=1) / np.sqrt(amostras.size))


def _relativo(diferenca: float, *escalas: float) -> float:
    return abs(diferenca) / max(1.0, *(abs(e) for e in escalas))


def appendix_identity_check(H, y, c: Constellation, order: int, k: int) -> float:
    """Maior discrepância relativa entre os lados das identidades exatas.

    Confere:
      - r_e² - r_k² = 2Re[(x_ZF - C⁻¹g)^H R^H R E g] - ||R E g||², E = C_k - C⁻¹
      - R^H R = C
      - z = Q^H y = R·C⁻¹g
      - ||R E g||² = g^H S_k^H S_k C⁻¹ g
    """
    H = np.asarray(H, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    C = gram(H)
    Q, R = qr_decompose(H)
    g = H.conj().T @ y
    z = Q.conj().T @ y

    inversa = exact_inverse(C)
    estado = approx_inverse(C, order, k)
    E = estado.approx - inversa

    x_exato = inversa @ g
    x_zf = quantize(x_exato, c)
    r_e_sq = babai_radius_sq(R, x_zf, x_exato)
    r_k_sq = babai_radius_sq(R, x_zf, estado.approx @ g)

    REg = R @ (E @ g)
    norma_REg = float(np.vdot(REg, REg).real)
    cruzado = np.vdot(R @ (x_zf - x_exato), REg)
    lado_direito = 2.0 * cruzado.real - norma_REg

    S = estado.residual
    cadeia = float(np.vdot(S @ g, S @ (inversa @ g)).real)

    discrepancias = (
        _relativo((r_e_sq - r_k_sq) - lado_direito, r_e_sq, r_k_sq),
        float(np.linalg.norm(R.conj().T @ R - C)) / max(1.0, float(np.linalg.norm(C))),
        float(np.linalg.norm(z - R @ x_exato)) / max(1.0, float(np.linalg.norm(z))),
        _relativo(norma_REg - cadeia, norma_REg, cadeia),
    )
    return max(discrepancias)


def trace_gap_check(
    H,
    c: Constellation,
    n0: float,
    order: int,
    k: int,
    trials: int,
    rng: np.random.Generator,
) -> ResultadoTraco:
    """Compara a média de r_e² - r_k² com 2·N₀·Re Tr(S_k) para H fixo.

    Símbolos e ruído novos a cada sorteio; x_ZF recalculado por sorteio.

    Raises:
        ErroPrecondicao: ||S_k||_F >= LIMITE_RESIDUO_TRACO (termo quadrático
            não desprezível).
    """
    if trials < 1:
        raise ErroConfiguracao(f"trials deve ser >= 1 (recebido {trials})")
    H = np.asarray(H, dtype=np.complex128)
    C = gram(H)
    _, R = qr_decompose(H)
    estado = approx_inverse(C, order, k)
    if estado.norma_residuo >= LIMITE_RESIDUO_TRACO:
        raise ErroPrecondicao(
            f"||S_k||_F = {estado.norma_residuo:.4g} >= {LIMITE_RESIDUO_TRACO}: "
            f"aproximação de traço não vale (ordem {order}, k = {k})"
        )
    inversa = exact_inverse(C)
    K = H.shape[1]

    # Sorteios em lote: cada linha é uma transmissão
    X = random_symbols(rng, c, (trials, K))
    Y, _ = transmit(H, X, n0, rng)
    G = Y @ H.conj()
    X_exato = G @ inversa.T
    X_zf = quantize(X_exato, c)
    X_k = G @ estado.approx.T

    r_e_sq = np.sum(np.abs((X_zf - X_exato) @ R.T) ** 2, axis=1)
    r_k_sq = np.sum(np.abs((X_zf - X_k) @ R.T) ** 2, axis=1)
    diferencas = r_e_sq - r_k_sq

    return ResultadoTraco(
        lhs=float(np.mean(diferencas)),
        rhs=float(2.0 * n0 * np.trace(estado.residual).real),
        stderr=erro_padrao(diferencas),
        trials=trials,
    )


def raios_por_iteracao(
    H,
    y,
    c: Constellation,
    order: int,
    k_list: Sequence[int],
) -> Tuple[float, Dict[int, Tuple[float, float]]]:
    """r_e² e, para cada k de ``k_list``, o par (r_k², Re Tr(S_k)) de uma realização."""
    H = np.asarray(H, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    C = gram(H)
    _, R = qr_decompose(H)
    g = H.conj().T @ y
    x_exato = exact_inverse(C) @ g
    x_zf = quantize(x_exato, c)
    r_e_sq = babai_radius_sq(R, x_zf, x_exato)

    pedidos = set(int(k) for k in k_list)
    por_k: Dict[int, Tuple[float, float]] = {}
    if not pedidos:
        return r_e_sq, por_k
    for estado in estados_inversa(C, order, max(pedidos)):
        if estado.iterations in pedidos:
            por_k[estado.iterations] = (
                babai_radius_sq(R, x_zf, estado.approx @ g),
                float(np.trace(estado.residual).real),
            )
    return r_e_sq, por_k


def agregar_raios(
    k_list: Sequence[int],
    r_e_sq: Sequence[float],
    por_tentativa: Sequence[Dict[int, Tuple[float, float]]],
) -> List[RadiusStudyRecord]:
    """Reduz as realizações (na ordem recebida) em um registro por k."""
    r_e_sq = np.asarray(r_e_sq, dtype=float)
    registros = []
    for k in k_list:
        r_k_sq = np.array([t[k][0] for t in por_tentativa], dtype=float)
        tracos = np.array([t[k][1] for t in por_tentativa], dtype=float)
        registros.append(RadiusStudyRecord(
            k=int(k),
            mean_r_sq=float(np.mean(r_k_sq)),
            stderr_r_sq=erro_padrao(r_k_sq),
            mean_r_e_sq=float(np.mean(r_e_sq)),
            trace_s_k=float(np.mean(tracos)),
            trials=int(r_k_sq.size),
        ))
    return registros


def radius_statistics(
    n: int,
    k_list: Sequence[int],
    order: int,
    c: Constellation,
    n0: float,
    trials: int,
    rng: np.random.Generator,
    n_users: int = None,
) -> List[RadiusStudyRecord]:
    """Médias de r_k² (e de r_e²) por k sobre canais, símbolos e ruído novos.

    ``n_users`` omitido: sistema quadrado n×n.
    """
    if trials < 1:
        raise ErroConfiguracao(f"trials deve ser >= 1 (recebido {trials})")
    k_list = [int(k) for k in k_list]
    if any(k < 0 for k in k_list):
        raise ErroConfiguracao(f"k_list com valores negativos: {k_list}")
    if not k_list:
        return []
    usuarios = n if n_users is None else n_users

    r_e_sq = []
    por_tentativa = []
    for _ in range(trials):
        canal = sample_channel(rng, n, usuarios)
        x = random_symbols(rng, c, usuarios)
        y, _ = transmit(canal, x, n0, rng)
        r_e, por_k = raios_por_iteracao(canal.H, y, c, order, k_list)
        r_e_sq.append(r_e)
        por_tentativa.append(por_k)

    registros = agregar_raios(k_list, r_e_sq, por_tentativa)
    logger.info("Estudo do raio %dx%d: %d tentativas, k = %s", n, usuarios, trials, k_list)
    return registros
