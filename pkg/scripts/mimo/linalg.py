#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Primitivas de álgebra linear complexa densa e a família de inversão
iterativa (ordens 2, 3 e 7) com inicialização que garante convergência.

Contagem de operações (flops): pares multiplicação-adição complexos; um
produto K×K por K×K conta K³. Custos usados em todo o projeto:

  - gram(H), H N×K ........................ N·K(K+1)/2  (triângulo superior)
  - init_gain + S₀ ........................ 2K³ + K²
  - iterate (ordem p) ..................... p·K³
  - exact_inverse (Cholesky + inversão) ... K³/3 + K³
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterator, Tuple

import numpy as np
import scipy.linalg

from constants import (
    DELTA_SALVAGUARDA,
    ORDENS_ITERATIVAS,
    PASSOS_DIVERGENCIA,
    PISO_DIVERGENCIA,
    TOLERANCIA_POSTO,
    TOLERANCIA_TRACO_NEGATIVO,
)
from erros import (
    ErroConfiguracao,
    ErroDimensao,
    ErroDivergencia,
    ErroNumerico,
    ErroSingularidade,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterInverseState:
    """Estado imutável da inversão iterativa após ``iterations`` passos."""

    target: np.ndarray      # C
    approx: np.ndarray      # C_k
    residual: np.ndarray    # S_k = I - C_k C
    iterations: int
    order: int
    flops: int
    crescimentos: int = 0   # passos seguidos com ||S||_F crescente

    @property
    def norma_residuo(self) -> float:
        return float(np.linalg.norm(self.residual))


# ---------------------------------------------------------------------------
# Contagem de operações
# ---------------------------------------------------------------------------

def flops_gram(n: int, k: int) -> int:
    return n * k * (k + 1) // 2


def flops_inicializacao(k: int) -> int:
    return 2 * k ** 3 + k ** 2


def flops_iteracao(k: int, ordem: int) -> int:
    return ordem * k ** 3


def flops_inverso_exato(k: int) -> int:
    return k ** 3 // 3 + k ** 3


# ---------------------------------------------------------------------------
# Validação
# ---------------------------------------------------------------------------

def _matriz(M, nome: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ErroDimensao(f"{nome} deve ser uma matriz 2-D (recebido ndim={M.ndim})")
    if not np.all(np.isfinite(M)):
        raise ErroNumerico(f"{nome} contém elementos não finitos")
    return M


def _quadrada(C, nome: str = 'C') -> np.ndarray:
    C = _matriz(C, nome)
    if C.shape[0] != C.shape[1]:
        raise ErroDimensao(f"{nome} deve ser quadrada (recebido {C.shape})")
    return C


def _hermitiana(C: np.ndarray) -> np.ndarray:
    superior = np.triu(C)
    C = superior + np.triu(C, 1).conj().T
    np.fill_diagonal(C, C.diagonal().real)
    return C


# ---------------------------------------------------------------------------
# Primitivas
# ---------------------------------------------------------------------------

def gram(H) -> np.ndarray:
    """C = H^H H, hermitiana por construção (triângulo superior espelhado)."""
    H = _matriz(H, 'H')
    n, k = H.shape
    if n < k:
        raise ErroDimensao(f"H precisa de N >= K (recebido {n}x{k})")
    return _hermitiana(H.conj().T @ H)


def qr_decompose(H) -> Tuple[np.ndarray, np.ndarray]:
    """QR fina por Householder com diagonal de R real e positiva.

    Raises:
        ErroDimensao: N < K.
        ErroSingularidade: |r_ii| < 1e-12·||H||_F (posto deficiente).
    """
    H = _matriz(H, 'H')
    n, k = H.shape
    if n < k:
        raise ErroDimensao(f"H precisa de N >= K (recebido {n}x{k})")

    Q, R = np.linalg.qr(H, mode='reduced')
    diagonal = np.diag(R)
    modulo = np.abs(diagonal)
    if np.any(modulo < TOLERANCIA_POSTO * np.linalg.norm(H)):
        raise ErroSingularidade("H não tem posto coluna completo (r_ii ~ 0)")

    fase = diagonal / modulo
    Q = Q * fase[None, :]
    R = np.triu(fase.conj()[:, None] * R)
    R[np.diag_indices(k)] = modulo
    return Q, R


def exact_inverse(C) -> np.ndarray:
    """C⁻¹ por fatoração de Cholesky (C hermitiana positiva definida)."""
    C = _quadrada(C)
    try:
        fator = scipy.linalg.cho_factor(C, lower=False)
    except np.linalg.LinAlgError as e:
        raise ErroSingularidade(f"C não é positiva definida: {e}") from e
    inversa = scipy.linalg.cho_solve(fator, np.eye(C.shape[0], dtype=np.complex128))
    return _hermitiana(inversa)


def limite_autovalor(C) -> Tuple[float, float, float]:
    """(m, t, λ_upper) do limite por traços para o maior autovalor de A = C^H C.

    A dimensão usada é a de C (K), pois A é K×K.
    """
    C = _quadrada(C)
    k = C.shape[0]
    A = C.conj().T @ C
    m = float(np.trace(A).real) / k
    # A hermitiana: tr(A²) = ||A||_F²
    t2 = float(np.vdot(A, A).real) / k - m ** 2
    if t2 < -TOLERANCIA_TRACO_NEGATIVO * max(1.0, m ** 2):
        raise ErroNumerico(f"t² negativo ({t2:.3e}) no limite de autovalor")
    t = float(np.sqrt(max(t2, 0.0)))
    return m, t, m + t * np.sqrt(k - 1)


def init_gain(C) -> Tuple[float, np.ndarray]:
    """Ganho a = 2/(λ_upper(1+δ)) e C₀ = a·C^H.

    Garante raio espectral de S₀ = I - C₀C estritamente menor que 1.
    """
    C = _quadrada(C)
    _, _, lambda_upper = limite_autovalor(C)
    if not lambda_upper > 0:
        raise ErroSingularidade("λ_upper não positivo: C nula?")
    a = 2.0 / (lambda_upper * (1.0 + DELTA_SALVAGUARDA))
    return a, a * C.conj().T


# ---------------------------------------------------------------------------
# Iterações
# ---------------------------------------------------------------------------

def iterate(state: IterInverseState) -> IterInverseState:
    """Um passo do método de ordem p: C_{k+1} = (I + S + ... + S^{p-1})·C_k.

    Com isso S_{k+1} = S_k^p. Para p = 2 é a iteração de Newton
    (2I - C_k C)C_k; para p = 3 e p = 7 reproduz as formas aninhadas.

    Raises:
        ErroDivergencia: ||S||_F cresceu em dois passos consecutivos.
    """
    if state.order not in ORDENS_ITERATIVAS:
        raise ErroConfiguracao(f"Ordem {state.order} não suportada ({ORDENS_ITERATIVAS})")

    S = state.residual
    k = S.shape[0]
    identidade = np.eye(k, dtype=np.complex128)
    norma_anterior = state.norma_residuo
    if norma_anterior >= 1.0:
        logger.warning(
            "||S_k||_F = %.4g >= 1 antes da iteração %d; convergência não garantida pelo proxy",
            norma_anterior, state.iterations + 1,
        )

    # Horner: P = I + S(I + S(... ))
    P = identidade + S
    for _ in range(state.order - 2):
        P = identidade + S @ P

    aproximada = P @ state.approx
    residuo = identidade - aproximada @ state.target

    norma_nova = float(np.linalg.norm(residuo))
    cresceu = norma_nova > norma_anterior and norma_nova > PISO_DIVERGENCIA
    crescimentos = state.crescimentos + 1 if cresceu else 0
    if crescimentos >= PASSOS_DIVERGENCIA:
        raise ErroDivergencia(
            f"Resíduo crescente por {crescimentos} passos (||S||_F = {norma_nova:.4g}) "
            f"na iteração {state.iterations + 1}"
        )

    return replace(
        state,
        approx=aproximada,
        residual=residuo,
        iterations=state.iterations + 1,
        flops=state.flops + flops_iteracao(k, state.order),
        crescimentos=crescimentos,
    )


def estado_inicial(C, order: int) -> IterInverseState:
    if order not in ORDENS_ITERATIVAS:
        raise ErroConfiguracao(f"Ordem {order} não suportada ({ORDENS_ITERATIVAS})")
    C = _quadrada(C)
    k = C.shape[0]
    _, C0 = init_gain(C)
    return IterInverseState(
        target=C,
        approx=C0,
        residual=np.eye(k, dtype=np.complex128) - C0 @ C,
        iterations=0,
        order=order,
        flops=flops_inicializacao(k),
    )


def estados_inversa(C, order: int, k_max: int) -> Iterator[IterInverseState]:
    """Gera os estados 0, 1, ..., k_max da inversão iterativa."""
    if k_max < 0:
        raise ErroConfiguracao(f"Número de iterações negativo: {k_max}")
    estado = estado_inicial(C, order)
    yield estado
    for _ in range(k_max):
        estado = iterate(estado)
        yield estado


def approx_inverse(C, order: int, k: int) -> IterInverseState:
    """Estado após k iterações a partir da inicialização C₀ = a·C^H."""
    estado = None
    for estado in estados_inversa(C, order, k):
        pass
    return estado
