import numpy as np
import pytest

from channel import sample_channel, snr_to_n0, transmit, trial_rng
from constellation import quantize, random_symbols
from detect import (
    InverseProvider,
    erro_inversa,
    expected_bound_check,
    mmse_detect,
    quantized_equality,
    sufficient_condition_check,
    zf_detect,
)
from erros import ErroConfiguracao, ErroDimensao
from linalg import gram


def _instancia(rng, c, n=16, k=4, n0=0.1):
    H = sample_channel(rng, n, k).H
    x = random_symbols(rng, c, k)
    y, _ = transmit(H, x, n0, rng)
    return H, x, y


class TestInverseProvider:
    @pytest.mark.parametrize('texto, ordem, k', [
        ('newton:7', 2, 7), ('order2:3', 2, 3), ('order3:2', 3, 2), ('ORDER7:1', 7, 1),
    ])
    def test_parse_iterativa(self, texto, ordem, k):
        inv = InverseProvider.parse(texto)
        assert (inv.kind, inv.order, inv.k) == ('iterative', ordem, k)

    def test_parse_exata(self):
        assert InverseProvider.parse(' exact ').is_exact

    @pytest.mark.parametrize('texto', ['order5:2', 'newton', 'newton:-1', '', 'inverse'])
    def test_parse_invalida(self, texto):
        with pytest.raises(ErroConfiguracao):
            InverseProvider.parse(texto)

    def test_texto(self):
        assert str(InverseProvider.iterative(2, 7)) == 'newton:7'
        assert str(InverseProvider.iterative(3, 4)) == 'order3:4'
        assert str(InverseProvider.exact()) == 'exact'

    def test_validacao(self):
        with pytest.raises(ErroConfiguracao):
            InverseProvider('iterative', 5, 1)
        with pytest.raises(ErroConfiguracao):
            InverseProvider('cholesky')


class TestZf:
    def test_sem_ruido_recupera_x(self, rng, qam16):
        H = sample_channel(rng, 8, 4).H
        x = random_symbols(rng, qam16, 4)
        resultado = zf_detect(H, H @ x, qam16, InverseProvider.exact())
        np.testing.assert_array_equal(resultado.hard, x)

    def test_canal_identidade(self, rng, qam4):
        y = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        resultado = zf_detect(np.eye(3), y, qam4, InverseProvider.exact())
        np.testing.assert_allclose(resultado.unconstrained, y)
        np.testing.assert_array_equal(resultado.hard, quantize(y, qam4))

    def test_iterativa_converge_para_exata(self, rng, qam4):
        H, _, y = _instancia(rng, qam4)
        exata = zf_detect(H, y, qam4, InverseProvider.exact())
        iterativa = zf_detect(H, y, qam4, InverseProvider.iterative(2, 12))
        np.testing.assert_allclose(iterativa.unconstrained, exata.unconstrained, atol=1e-8)

    def test_flops(self, rng, qam4):
        H, _, y = _instancia(rng, qam4, n=8)
        # gram 80 + H^H y 32 + inversa + produto 16
        assert zf_detect(H, y, qam4, InverseProvider.exact()).flops == 80 + 32 + (21 + 64) + 16
        newton = zf_detect(H, y, qam4, InverseProvider.iterative(2, 3)).flops
        assert newton == 80 + 32 + (2 * 64 + 16 + 3 * 2 * 64) + 16

    def test_dimensao_de_y(self, rng, qam4):
        H = sample_channel(rng, 8, 4).H
        with pytest.raises(ErroDimensao):
            zf_detect(H, np.zeros(7), qam4, InverseProvider.exact())


class TestMmse:
    def test_canal_identidade(self, rng, qam4):
        y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        resultado = mmse_detect(np.eye(4), y, qam4, 0.25, 1.0, InverseProvider.exact())
        np.testing.assert_allclose(resultado.unconstrained, y / 1.25)

    def test_regularizacao_desprezivel_equivale_ao_zf(self, rng, qam4):
        H, _, y = _instancia(rng, qam4)
        zf = zf_detect(H, y, qam4, InverseProvider.exact())
        mmse = mmse_detect(H, y, qam4, 1e-9, 1.0, InverseProvider.exact())
        np.testing.assert_allclose(mmse.unconstrained, zf.unconstrained, atol=1e-6)

    def test_iterativa_converge_para_exata(self, rng, qam4):
        H, _, y = _instancia(rng, qam4)
        exata = mmse_detect(H, y, qam4, 0.1, 1.0, InverseProvider.exact())
        iterativa = mmse_detect(H, y, qam4, 0.1, 1.0, InverseProvider.iterative(2, 12))
        np.testing.assert_allclose(iterativa.unconstrained, exata.unconstrained, atol=1e-8)

    @pytest.mark.parametrize('n0, es', [(0.0, 1.0), (-0.1, 1.0), (0.1, 0.0)])
    def test_parametros_invalidos(self, rng, qam4, n0, es):
        H, _, y = _instancia(rng, qam4)
        with pytest.raises(ErroConfiguracao):
            mmse_detect(H, y, qam4, n0, es, InverseProvider.exact())


class TestIgualdadeQuantizada:
    def test_muitas_iteracoes(self, rng, qam16):
        for _ in range(20):
            H, _, y = _instancia(rng, qam16, n=16, k=4)
            assert quantized_equality(H, y, qam16, 2, 30)

    def test_deterministica(self, rng, qam4):
        H, _, y = _instancia(rng, qam4)
        assert quantized_equality(H, y, qam4, 2, 0) == quantized_equality(H, y, qam4, 2, 0)

    @pytest.mark.lento
    def test_128x8_newton_7_iguala_a_exata(self, qam16):
        for snr in (0.0, 2.0, 4.0):
            n0 = snr_to_n0(snr, 8, 1.0)
            iguais = {3: 0, 5: 0, 7: 0}
            for i in range(10_000):
                rng = trial_rng(11, i)
                H = sample_channel(rng, 128, 8).H
                x = random_symbols(rng, qam16, 8)
                y, _ = transmit(H, x, n0, rng)
                for k in iguais:
                    iguais[k] += quantized_equality(H, y, qam16, 2, k)
            assert iguais[7] >= 9990, snr
            assert iguais[3] <= iguais[7] and iguais[5] <= iguais[7], snr


class TestCondicaoSuficiente:
    def test_erro_nulo_sem_ruido(self, rng, qam4):
        H = sample_channel(rng, 8, 4).H
        x = random_symbols(rng, qam4, 4)
        zf = zf_detect(H, H @ x, qam4, InverseProvider.exact())
        assert sufficient_condition_check(zf, np.zeros((4, 4)), zf.g, qam4.d_min)

    def test_implica_igualdade(self, rng, qam4):
        suficientes = 0
        for _ in range(500):
            H, _, y = _instancia(rng, qam4, n=32, k=4, n0=0.2)
            zf = zf_detect(H, y, qam4, InverseProvider.exact())
            E, _ = erro_inversa(gram(H), 2, 5)
            if sufficient_condition_check(zf, E, zf.g, qam4.d_min):
                suficientes += 1
                assert quantized_equality(H, y, qam4, 2, 5)
        assert suficientes > 0

    def test_formas_incompativeis(self, rng, qam4):
        H, _, y = _instancia(rng, qam4)
        zf = zf_detect(H, y, qam4, InverseProvider.exact())
        with pytest.raises(ErroDimensao):
            sufficient_condition_check(zf, np.zeros((3, 3)), zf.g, qam4.d_min)


class TestLimiteEsperado:
    def test_residuo_nulo(self, qam4):
        resultado = expected_bound_check(np.zeros((4, 4)), qam4.points, qam4.d_min)
        assert resultado.re_ok and resultado.im_ok
        np.testing.assert_allclose(resultado.margins, qam4.d_min / 2)

    def test_residuo_identidade(self, qam16):
        x = np.full(2, qam16.points[0])     # |Re| = 3·d_min/2
        resultado = expected_bound_check(np.eye(2), x, qam16.d_min)
        assert not resultado.re_ok
        assert np.all(resultado.margins < 0)

    def test_newton_sete_em_canal_alto(self, rng, qam4):
        violacoes = 0
        for _ in range(300):
            H = sample_channel(rng, 32, 4).H
            x = random_symbols(rng, qam4, 4)
            _, estado = erro_inversa(gram(H), 2, 7)
            limite = expected_bound_check(estado.residual, x, qam4.d_min)
            violacoes += not (limite.re_ok and limite.im_ok)
        assert violacoes == 0
