import logging

import numpy as np
import pytest

from channel import sample_channel
from constants import DELTA_SALVAGUARDA
from erros import ErroConfiguracao, ErroDimensao, ErroDivergencia, ErroNumerico, ErroSingularidade
from linalg import (
    IterInverseState,
    approx_inverse,
    estado_inicial,
    estados_inversa,
    exact_inverse,
    flops_gram,
    flops_inicializacao,
    flops_inverso_exato,
    gram,
    init_gain,
    iterate,
    limite_autovalor,
    qr_decompose,
)


def _gram_aleatoria(rng, n=16, k=8):
    return gram(sample_channel(rng, n, k).H)


def _estado_escalar(ordem):
    return IterInverseState(
        target=np.array([[2.0 + 0j]]),
        approx=np.array([[0.25 + 0j]]),
        residual=np.array([[0.5 + 0j]]),
        iterations=0,
        order=ordem,
        flops=0,
    )


class TestGram:
    def test_uns(self):
        np.testing.assert_allclose(gram(np.ones((2, 1))), [[2.0]])

    def test_identidade(self):
        np.testing.assert_allclose(gram(np.eye(3)), np.eye(3))

    def test_confere_com_laco_triplo(self, rng):
        H = sample_channel(rng, 8, 4).H
        esperado = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            for j in range(4):
                for n in range(8):
                    esperado[i, j] += np.conj(H[n, i]) * H[n, j]
        np.testing.assert_allclose(gram(H), esperado, atol=1e-12)

    def test_hermitiana_exata(self, rng):
        C = _gram_aleatoria(rng)
        np.testing.assert_array_equal(C, C.conj().T)
        assert np.all(C.diagonal().imag == 0)

    def test_exige_n_maior_ou_igual_a_k(self):
        with pytest.raises(ErroDimensao):
            gram(np.ones((2, 3)))

    def test_nao_finito(self):
        with pytest.raises(ErroNumerico):
            gram(np.array([[np.inf], [1.0]]))

    def test_flops(self):
        assert flops_gram(8, 4) == 80


class TestQr:
    def test_identidade(self):
        Q, R = qr_decompose(np.eye(3))
        np.testing.assert_allclose(Q, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(R, np.eye(3), atol=1e-15)

    def test_coluna_unica(self):
        Q, R = qr_decompose(np.array([[2.0], [0.0]]))
        np.testing.assert_allclose(Q, [[1.0], [0.0]], atol=1e-15)
        np.testing.assert_allclose(R, [[2.0]])

    def test_reconstrucao(self, rng):
        H = sample_channel(rng, 16, 16).H
        Q, R = qr_decompose(H)
        assert np.linalg.norm(Q @ R - H) / np.linalg.norm(H) < 1e-10
        np.testing.assert_allclose(R.conj().T @ R, gram(H), atol=1e-9)
        np.testing.assert_allclose(Q.conj().T @ Q, np.eye(16), atol=1e-10)

    def test_diagonal_real_positiva(self, rng):
        _, R = qr_decompose(sample_channel(rng, 12, 5).H)
        assert np.all(R.diagonal().imag == 0)
        assert np.all(R.diagonal().real > 0)
        np.testing.assert_array_equal(R, np.triu(R))

    def test_posto_deficiente(self):
        with pytest.raises(ErroSingularidade):
            qr_decompose(np.ones((3, 2)))


class TestInversaExata:
    def test_identidade(self):
        np.testing.assert_allclose(exact_inverse(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_allclose(exact_inverse(np.diag([1.0, 2.0])), np.diag([1.0, 0.5]))

    def test_residuo(self, rng):
        C = _gram_aleatoria(rng, 16, 8)
        np.testing.assert_allclose(exact_inverse(C) @ C, np.eye(8), atol=1e-9)

    def test_nao_positiva_definida(self):
        with pytest.raises(ErroSingularidade):
            exact_inverse(np.diag([1.0, -1.0]))

    def test_nao_quadrada(self):
        with pytest.raises(ErroDimensao):
            exact_inverse(np.ones((2, 3)))

    def test_flops(self):
        assert flops_inverso_exato(4) == 21 + 64


class TestInicializacao:
    def test_limite_diagonal(self):
        m, t, lambda_upper = limite_autovalor(np.diag([1.0, 2.0]))
        assert (m, t, lambda_upper) == pytest.approx((2.5, 1.5, 4.0))
        a, C0 = init_gain(np.diag([1.0, 2.0]))
        assert a == pytest.approx(0.5, rel=1e-5)
        np.testing.assert_allclose(C0, a * np.diag([1.0, 2.0]))

    @pytest.mark.parametrize('k', [1, 2, 5])
    def test_identidade_usa_salvaguarda(self, k):
        m, t, lambda_upper = limite_autovalor(np.eye(k))
        assert (m, t, lambda_upper) == pytest.approx((1.0, 0.0, 1.0))
        a, C0 = init_gain(np.eye(k))
        assert a == pytest.approx(2.0, rel=1e-5)
        autovalores = np.linalg.eigvals(np.eye(k) - C0)
        assert np.all(np.abs(autovalores) < 1)
        np.testing.assert_allclose(autovalores.real, -1 + 2 * DELTA_SALVAGUARDA, atol=1e-9)

    def test_limite_cobre_maior_autovalor(self, rng):
        for _ in range(20):
            C = _gram_aleatoria(rng, 10, 6)
            A = C.conj().T @ C
            _, _, lambda_upper = limite_autovalor(C)
            assert lambda_upper >= np.linalg.eigvalsh(A).max() * (1 - 1e-12)

    def test_raio_espectral_inicial_menor_que_um(self, rng):
        for _ in range(20):
            C = _gram_aleatoria(rng, 6, 6)
            estado = estado_inicial(C, 2)
            assert np.abs(np.linalg.eigvals(estado.residual)).max() < 1

    def test_matriz_nula(self):
        with pytest.raises(ErroSingularidade):
            init_gain(np.zeros((2, 2)))


class TestIteracao:
    @pytest.mark.parametrize('ordem, c1, s1', [
        (2, 0.375, 0.25),
        (3, 0.4375, 0.125),
        (7, 0.49609375, 0.0078125),
    ])
    def test_passo_escalar(self, ordem, c1, s1):
        estado = iterate(_estado_escalar(ordem))
        assert estado.approx[0, 0] == pytest.approx(c1)
        assert estado.residual[0, 0] == pytest.approx(s1)
        assert estado.iterations == 1
        assert estado.flops == ordem

    @pytest.mark.parametrize('ordem', [2, 3, 7])
    def test_residuo_eleva_a_ordem(self, rng, ordem):
        C = _gram_aleatoria(rng)
        S0 = estado_inicial(C, ordem).residual
        S1 = approx_inverse(C, ordem, 1).residual
        np.testing.assert_allclose(S1, np.linalg.matrix_power(S0, ordem), atol=1e-10)

    def test_zero_iteracoes(self, rng):
        C = _gram_aleatoria(rng)
        a, C0 = init_gain(C)
        estado = approx_inverse(C, 2, 0)
        np.testing.assert_allclose(estado.approx, C0)
        assert estado.flops == flops_inicializacao(8)

    def test_converge_para_inversa_diagonal(self):
        # autovalor de S₀ em -1 + 2δ: a convergência só aparece depois de ~2^22 passos efetivos
        estado = approx_inverse(np.diag([1.0, 2.0]), 2, 26)
        np.testing.assert_allclose(estado.approx, np.diag([1.0, 0.5]), atol=1e-10)

    def test_converge_em_canal_alto(self, canal_alto):
        C = gram(canal_alto)
        estado = approx_inverse(C, 2, 12)
        np.testing.assert_allclose(estado.approx, exact_inverse(C), rtol=1e-8, atol=1e-12)

    def test_estabiliza_apos_convergir(self, canal_alto):
        # resíduo no piso de arredondamento não conta como divergência
        estado = approx_inverse(gram(canal_alto), 7, 30)
        assert estado.norma_residuo < 1e-10

    def test_residuo_decresce(self, canal_alto):
        normas = [e.norma_residuo for e in estados_inversa(gram(canal_alto), 3, 4)]
        assert all(b < a for a, b in zip(normas, normas[1:]))

    def test_flops_acumulados(self, rng):
        C = _gram_aleatoria(rng)
        assert approx_inverse(C, 3, 2).flops == 2 * 8 ** 3 + 8 ** 2 + 2 * 3 * 8 ** 3

    def test_ordem_invalida(self, rng):
        with pytest.raises(ErroConfiguracao):
            estado_inicial(_gram_aleatoria(rng), 4)

    def test_iteracoes_negativas(self, rng):
        with pytest.raises(ErroConfiguracao):
            list(estados_inversa(_gram_aleatoria(rng), 2, -1))

    def test_divergencia(self, caplog):
        C = np.eye(2, dtype=complex)
        estado = IterInverseState(
            target=C, approx=3 * C, residual=-2 * C, iterations=0, order=2, flops=0,
        )
        with caplog.at_level(logging.WARNING):
            estado = iterate(estado)
            with pytest.raises(ErroDivergencia):
                iterate(estado)
        assert 'convergência não garantida' in caplog.text
