import numpy as np
import pytest

from analysis import (
    agregar_raios,
    appendix_identity_check,
    erro_padrao,
    raios_por_iteracao,
    radius_statistics,
    trace_gap_check,
)
from channel import sample_channel, snr_to_n0, transmit
from constellation import random_symbols
from erros import ErroConfiguracao, ErroPrecondicao
from linalg import approx_inverse, gram


def _k_com_residuo_abaixo(C, limite, ordem=2):
    for k in range(1, 20):
        if approx_inverse(C, ordem, k).norma_residuo < limite:
            return k
    raise AssertionError('resíduo não caiu abaixo do limite')


class TestErroPadrao:
    def test_amostra_unica(self):
        assert erro_padrao([3.0]) == 0.0

    def test_valor(self):
        assert erro_padrao([1.0, 3.0]) == pytest.approx(1.0)


class TestIdentidade:
    @pytest.mark.parametrize('k', [0, 3, 30])
    def test_discrepancia_desprezivel(self, rng, qam4, k):
        for _ in range(5):
            H = sample_channel(rng, 16, 8).H
            x = random_symbols(rng, qam4, 8)
            y, _ = transmit(H, x, 0.8, rng)
            assert appendix_identity_check(H, y, qam4, 2, k) <= 1e-9

    @pytest.mark.parametrize('ordem', [3, 7])
    def test_outras_ordens(self, rng, qam16, ordem):
        H = sample_channel(rng, 16, 8).H
        x = random_symbols(rng, qam16, 8)
        y, _ = transmit(H, x, 0.2, rng)
        assert appendix_identity_check(H, y, qam16, ordem, 2) <= 1e-9


class TestLacunaDeTraco:
    def test_media_confere_com_traco(self, canal_alto, qam4, rng):
        k = _k_com_residuo_abaixo(gram(canal_alto), 1e-4)
        resultado = trace_gap_check(canal_alto, qam4, 0.4, 2, k, 2000, rng)
        assert resultado.rhs > 0
        assert abs(resultado.lhs - resultado.rhs) <= max(0.15 * abs(resultado.rhs), 3 * resultado.stderr)
        assert resultado.trials == 2000

    def test_residuo_no_piso(self, canal_alto, qam4, rng):
        resultado = trace_gap_check(canal_alto, qam4, 0.4, 2, 14, 50, rng)
        assert abs(resultado.lhs) < 1e-10
        assert abs(resultado.rhs) < 1e-10

    def test_lado_direito_linear_em_n0(self, canal_alto, qam4):
        k = _k_com_residuo_abaixo(gram(canal_alto), 1e-3)
        a = trace_gap_check(canal_alto, qam4, 0.4, 2, k, 5, np.random.default_rng(0))
        b = trace_gap_check(canal_alto, qam4, 0.8, 2, k, 5, np.random.default_rng(0))
        assert b.rhs == pytest.approx(2 * a.rhs, rel=1e-12)

    def test_residuo_grande(self, canal_alto, qam4, rng):
        with pytest.raises(ErroPrecondicao):
            trace_gap_check(canal_alto, qam4, 0.4, 2, 0, 10, rng)

    def test_tentativas_invalidas(self, canal_alto, qam4, rng):
        with pytest.raises(ErroConfiguracao):
            trace_gap_check(canal_alto, qam4, 0.4, 2, 8, 0, rng)


class TestRaiosPorIteracao:
    def test_sem_ruido(self, canal_alto, qam4, rng):
        x = random_symbols(rng, qam4, 4)
        r_e_sq, por_k = raios_por_iteracao(canal_alto, canal_alto @ x, qam4, 2, [1, 3])
        assert r_e_sq == pytest.approx(0.0, abs=1e-20)
        assert sorted(por_k) == [1, 3]

    def test_lista_vazia(self, canal_alto, qam4, rng):
        x = random_symbols(rng, qam4, 4)
        _, por_k = raios_por_iteracao(canal_alto, canal_alto @ x, qam4, 2, [])
        assert por_k == {}

    def test_traco_positivo_para_newton(self, canal_alto, qam4, rng):
        x = random_symbols(rng, qam4, 4)
        y, _ = transmit(canal_alto, x, 0.4, rng)
        _, por_k = raios_por_iteracao(canal_alto, y, qam4, 2, [1, 2, 3, 4])
        tracos = [por_k[k][1] for k in (1, 2, 3, 4)]
        assert all(t > 0 for t in tracos)
        assert all(b < a for a, b in zip(tracos, tracos[1:]))


class TestEstatisticasDoRaio:
    @pytest.mark.lento
    def test_canal_alto(self, qam4, rng):
        registros = radius_statistics(32, [6, 7, 8], 2, qam4, 0.4, 1000, rng, n_users=4)
        assert [r.k for r in registros] == [6, 7, 8]
        for anterior, atual in zip(registros, registros[1:]):
            assert atual.mean_r_sq >= anterior.mean_r_sq - 2 * max(atual.stderr_r_sq, anterior.stderr_r_sq)
        # mesmas realizações: a diferença das médias é a média das diferenças
        assert registros[1].mean_r_sq < registros[1].mean_r_e_sq
        assert registros[2].mean_r_sq == pytest.approx(registros[2].mean_r_e_sq, rel=1e-6)
        assert all(r.trials == 1000 for r in registros)

    @pytest.mark.lento
    def test_sistema_16x16_newton(self, qam4, rng):
        k_list = [1, 2, 3, 4, 5, 6, 7]
        registros = radius_statistics(16, k_list, 2, qam4, snr_to_n0(10.0, 16, 1.0), 2000, rng)
        assert [r.k for r in registros] == k_list
        for anterior, atual in zip(registros, registros[1:]):
            assert atual.mean_r_sq >= anterior.mean_r_sq - 2 * max(atual.stderr_r_sq, anterior.stderr_r_sq)
        assert all(r.mean_r_sq < r.mean_r_e_sq for r in registros)
        assert all(r.trials == 2000 for r in registros)

    def test_lista_vazia(self, qam4, rng):
        assert radius_statistics(4, [], 2, qam4, 0.4, 10, rng) == []

    def test_sistema_quadrado_por_padrao(self, qam4, rng):
        registros = radius_statistics(4, [2], 2, qam4, 0.4, 5, rng)
        assert registros[0].trials == 5

    def test_parametros_invalidos(self, qam4, rng):
        with pytest.raises(ErroConfiguracao):
            radius_statistics(4, [1], 2, qam4, 0.4, 0, rng)
        with pytest.raises(ErroConfiguracao):
            radius_statistics(4, [-1], 2, qam4, 0.4, 5, rng)

    def test_agregacao(self):
        por_tentativa = [{1: (1.0, 0.5)}, {1: (3.0, 0.7)}]
        registro, = agregar_raios([1], [2.0, 4.0], por_tentativa)
        assert registro.mean_r_sq == pytest.approx(2.0)
        assert registro.stderr_r_sq == pytest.approx(1.0)
        assert registro.mean_r_e_sq == pytest.approx(3.0)
        assert registro.trace_s_k == pytest.approx(0.6)
