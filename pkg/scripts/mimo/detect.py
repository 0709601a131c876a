#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Detecção linear ZF / MMSE com inversa exata ou iterativa, e os
diagnósticos de tolerância ao erro da inversa aproximada.

No caminho de detecção só C_k·g é usado; o erro E = C_k - C⁻¹ é formado
apenas dentro dos diagnósticos.
"""

import logging
import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from constants import ORDENS_ITERATIVAS
from constellation import Constellation, quantize
from erros import ErroConfiguracao, ErroDimensao
from linalg import (
    IterInverseState,
    approx_inverse,
    exact_inverse,
    flops_gram,
    flops_inverso_exato,
    gram,
)

logger = logging.getLogger(__name__)

_PADRAO_INVERSA = re.compile(r'^(newton|order(2|3|7)):(\d+)$')


@dataclass(frozen=True)
class InverseProvider:
    """Escolha entre C⁻¹ exata e C_k iterativa (ordem, k)."""

    kind: str = 'exact'
    order: int = 2
    k: int = 0

    def __post_init__(self):
        if self.kind not in ('exact', 'iterative'):
            raise ErroConfiguracao(f"Tipo de inversa desconhecido: {self.kind!r}")
        if self.kind == 'iterative':
            if self.order not in ORDENS_ITERATIVAS:
                raise ErroConfiguracao(f"Ordem {self.order} não suportada ({ORDENS_ITERATIVAS})")
            if self.k < 0:
                raise ErroConfiguracao(f"Número de iterações negativo: {self.k}")

    @classmethod
    def exact(cls) -> 'InverseProvider':
        return cls('exact')

    @classmethod
    def iterative(cls, order: int, k: int) -> 'InverseProvider':
        return cls('iterative', order, k)

    @classmethod
    def parse(cls, texto: str) -> 'InverseProvider':
        """Converte ``exact``, ``newton:K``, ``order3:K`` ou ``order7:K``."""
        texto = (texto or '').strip().lower()
        if texto == 'exact':
            return cls.exact()
        match = _PADRAO_INVERSA.match(texto)
        if not match:
            raise ErroConfiguracao(
                f"Inversa inválida: {texto!r} (use exact, newton:K, order3:K ou order7:K)"
            )
        ordem = 2 if match.group(1) == 'newton' else int(match.group(2))
        return cls.iterative(ordem, int(match.group(3)))

    @property
    def is_exact(self) -> bool:
        return self.kind == 'exact'

    def __str__(self) -> str:
        if self.is_exact:
            return 'exact'
        prefixo = 'newton' if self.order == 2 else f'order{self.order}'
        return f'{prefixo}:{self.k}'

    def apply(self, C) -> Tuple[np.ndarray, int, Optional[IterInverseState]]:
        """Devolve (inversa, flops, estado iterativo ou None)."""
        if self.is_exact:
            return exact_inverse(C), flops_inverso_exato(np.shape(C)[0]), None
        estado = approx_inverse(C, self.order, self.k)
        return estado.approx, estado.flops, estado


@dataclass(frozen=True)
class DetectionResult:
    unconstrained: np.ndarray   # C̃·g
    hard: np.ndarray            # ⌈C̃·g⌋
    g: np.ndarray               # H^H y
    flops: int


class ResultadoLimite(NamedTuple):
    re_ok: bool
    im_ok: bool
    margins: np.ndarray


def _validar_sistema(H, y) -> Tuple[np.ndarray, np.ndarray]:
    H = np.asarray(H, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if H.ndim != 2:
        raise ErroDimensao(f"H deve ser 2-D (recebido ndim={H.ndim})")
    if y.shape != (H.shape[0],):
        raise ErroDimensao(f"|y| = {y.shape} incompatível com N = {H.shape[0]}")
    return H, y


def _detectar(H, y, C, c: Constellation, inv: InverseProvider) -> DetectionResult:
    n, k = H.shape
    g = H.conj().T @ y
    inversa, flops_inversa, _ = inv.apply(C)
    livre = inversa @ g
    return DetectionResult(
        unconstrained=livre,
        hard=quantize(livre, c),
        g=g,
        flops=flops_gram(n, k) + n * k + flops_inversa + k * k,
    )


def zf_detect(H, y, c: Constellation, inv: InverseProvider) -> DetectionResult:
    """x_ZF = ⌈(H^H H)⁻¹ H^H y⌋ com a inversa do provedor."""
    H, y = _validar_sistema(H, y)
    return _detectar(H, y, gram(H), c, inv)


def mmse_detect(H, y, c: Constellation, n0: float, es: float, inv: InverseProvider) -> DetectionResult:
    """x_MMSE = ⌈(H^H H + (N₀/E_s)I)⁻¹ H^H y⌋ com a inversa do provedor."""
    if not (n0 > 0 and es > 0):
        raise ErroConfiguracao(f"MMSE exige N₀ > 0 e Es > 0 (recebido {n0}, {es})")
    H, y = _validar_sistema(H, y)
    C = gram(H) + (n0 / es) * np.eye(H.shape[1])
    return _detectar(H, y, C, c, inv)


# ---------------------------------------------------------------------------
# Diagnósticos
# ---------------------------------------------------------------------------

def quantized_equality(H, y, c: Constellation, order: int, k: int) -> bool:
    """True se ⌈C_k g⌋ = ⌈C⁻¹ g⌋ em todos os elementos."""
    H, y = _validar_sistema(H, y)
    C = gram(H)
    g = H.conj().T @ y
    aproximada = approx_inverse(C, order, k).approx
    return bool(np.array_equal(quantize(aproximada @ g, c), quantize(exact_inverse(C) @ g, c)))


def erro_inversa(C, order: int, k: int) -> Tuple[np.ndarray, IterInverseState]:
    """E = C_k - C⁻¹ e o estado iterativo correspondente."""
    estado = approx_inverse(C, order, k)
    return estado.approx - exact_inverse(C), estado


def sufficient_condition_check(zf_exact: DetectionResult, E, g, d_min: float) -> bool:
    """Condição suficiente para ⌈C_k g⌋ = x_ZF.

    Com z = x_ZF - C⁻¹g, exige |Re(z_i - (Eg)_i)| < d_min/2 e
    |Im(z_i - (Eg)_i)| < d_min/2 para todo i.
    """
    E = np.asarray(E, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    z = zf_exact.hard - zf_exact.unconstrained
    if E.shape != (z.size, z.size) or g.shape != z.shape:
        raise ErroDimensao(f"Formas incompatíveis: E {E.shape}, g {g.shape}, z {z.shape}")
    w = z - E @ g
    meia = d_min / 2.0
    return bool(np.all(np.abs(w.real) < meia) and np.all(np.abs(w.imag) < meia))


def expected_bound_check(S_k, x, d_min: float) -> ResultadoLimite:
    """Versão por realização dos limites |Re(S_k x)_i|, |Im(S_k x)_i| < d_min/2.

    ``margins`` = d_min/2 - max(|Re|, |Im|) por elemento; negativo indica violação.
    """
    v = np.asarray(S_k, dtype=np.complex128) @ np.asarray(x, dtype=np.complex128)
    meia = d_min / 2.0
    margem_re = meia - np.abs(v.real)
    margem_im = meia - np.abs(v.imag)
    return ResultadoLimite(
        re_ok=bool(np.all(margem_re > 0)),
        im_ok=bool(np.all(margem_im > 0)),
        margins=np.minimum(margem_re, margem_im),
    )
