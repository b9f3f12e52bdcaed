import numpy as np
import pytest
from scipy.interpolate import interp1d
from scipy.stats import norm

from gfnoma.channel import ChannelRealization
from gfnoma.frame import build_layout, empty_grid, extract_data_blocks, map_data, map_pilots
from gfnoma.signatures import Codebook, MaskingTable, generate_grassmannian, generate_masking
from gfnoma.txrx import (
    ConvolutionalCode,
    crc_attach,
    crc_check,
    estimate_channels,
    info_length,
    interpolate,
    ls_estimate,
    make_payload,
    mmse_pic_receive,
    qam_modulate,
    qam_soft_demod,
    random_payload,
)
from gfnoma.txrx.crc import CRC24A_POLY, crc24
from gfnoma.txrx.receiver import effective_columns

from conftest import crandn


def poly_mod_oracle(bits):
    """Remainder of msg(x) * x^24 modulo the CRC24A generator, by big-integer long division."""
    gen = (1 << 24) | CRC24A_POLY
    value = int("".join(str(int(b)) for b in bits) or "0", 2) << 24
    while value.bit_length() > 24:
        value ^= gen << (value.bit_length() - 25)
    return [(value >> (23 - i)) & 1 for i in range(24)]


class TestCrc:
    def test_round_trip(self, rng):
        for n in (1, 17, 264):
            assert crc_check(crc_attach(rng.integers(0, 2, n)))

    def test_single_bit_flip(self, rng):
        msg = crc_attach(rng.integers(0, 2, 264))
        for pos in (0, 100, 287):
            bad = msg.copy()
            bad[pos] ^= 1
            assert not crc_check(bad)

    def test_all_zero(self):
        np.testing.assert_array_equal(crc24(np.zeros(40)), 0)

    def test_matches_polynomial_division(self, rng):
        for _ in range(20):
            bits = rng.integers(0, 2, rng.integers(1, 300))
            np.testing.assert_array_equal(crc24(bits), poly_mod_oracle(bits))

    def test_standard_check_value(self):
        # CRC-24/LTE-A of ASCII "123456789"
        bits = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
        assert int("".join(map(str, crc24(bits))), 2) == 0xCDE703

    def test_empty(self):
        with pytest.raises(ValueError):
            crc_attach([])


class TestCode:
    def test_noiseless_round_trip(self, rng):
        codec = ConvolutionalCode("2/3")
        x = rng.integers(0, 2, 264).astype(np.uint8)
        c = codec.encode(x)
        assert c.size == 396
        np.testing.assert_array_equal(codec.decode(1.0 - 2.0 * c), x)

    def test_rate_half(self, rng):
        codec = ConvolutionalCode(0.5)
        x = rng.integers(0, 2, 100).astype(np.uint8)
        np.testing.assert_array_equal(codec.decode(1.0 - 2.0 * codec.encode(x)), x)

    def test_all_zero(self):
        codec = ConvolutionalCode("2/3")
        c = codec.encode(np.zeros(288, dtype=np.uint8))
        assert not c.any()
        assert not codec.decode(np.ones(c.size)).any()

    def test_sizing(self):
        codec = ConvolutionalCode("2/3")
        assert codec.coded_length(288) == 432
        assert info_length(216, codec) == 264
        with pytest.raises(ValueError):
            codec.encode(np.zeros(3, dtype=np.uint8))
        with pytest.raises(ValueError):
            codec.decode(np.zeros(10))

    def test_unsupported_rate(self):
        with pytest.raises(ValueError):
            ConvolutionalCode("3/4")

    def test_beats_uncoded_at_4db(self):
        rng = np.random.default_rng(4)
        codec = ConvolutionalCode("2/3")
        ebn0 = 10 ** 0.4
        # unit-energy 4-QAM carries 2 R information bits per symbol
        n0 = 1.0 / (2 * float(codec.rate) * ebn0)
        errors = total = 0
        for _ in range(150):
            x = rng.integers(0, 2, 288).astype(np.uint8)
            s = qam_modulate(codec.encode(x))
            y = s + np.sqrt(n0) * crandn(rng, s.size)
            errors += np.sum(codec.decode(qam_soft_demod(y, 1.0, n0)) != x)
            total += x.size
        uncoded = norm.sf(np.sqrt(2 * ebn0))
        assert errors / total < uncoded


class TestQam:
    def test_gray_map(self):
        np.testing.assert_allclose(qam_modulate([0, 0, 0, 1, 1, 0, 1, 1]),
                                   np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2))

    def test_unit_energy(self):
        s = qam_modulate([0, 0, 0, 1, 1, 0, 1, 1])
        assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=1e-15)

    def test_demod_signs(self, rng):
        b = rng.integers(0, 2, 64)
        llr = qam_soft_demod(qam_modulate(b), 1.0, 1e-6)
        np.testing.assert_array_equal((llr < 0).astype(int), b)

    def test_demod_compensates_gain(self):
        g = 0.5 * np.exp(1j * 2.0)
        llr = qam_soft_demod(g * qam_modulate([1, 0]), g, 0.1)
        assert llr[0] < 0 < llr[1]
        assert llr[1] == pytest.approx(2 * np.sqrt(2) * abs(g) ** 2 / np.sqrt(2) / 0.1)

    def test_odd_bits(self):
        with pytest.raises(ValueError):
            qam_modulate([1, 0, 1])


def flat(layout, h, p, num_rx=1):
    h = np.asarray(h, dtype=complex).reshape(len(p), 1, 1, -1)
    g = np.broadcast_to(h, (len(p), layout.num_subcarriers, layout.num_symbols, h.shape[-1]))
    return ChannelRealization(np.array(g), np.asarray(p, dtype=float))


@pytest.fixture(scope="module")
def layout():
    return build_layout("contiguous")


class TestLsEstimate:
    def test_orthonormal_exact(self, layout, rng):
        cb = Codebook(np.eye(12))
        h = crandn(rng, 3, 2)
        p = [1.0, 4.0, 9.0]
        grid = map_pilots(empty_grid(layout, 2), layout, cb, MaskingTable.all_ones(12, 12), [0, 4, 7],
                          flat(layout, h, p, 2))
        est = ls_estimate(grid, layout, cb, MaskingTable.all_ones(12, 12), [0, 4, 7])
        expected = np.sqrt(12 * np.array(p))[:, None] * h
        np.testing.assert_allclose(est, np.broadcast_to(expected[:, :, None], est.shape), atol=1e-10)

    def test_mask_is_removed(self, layout, rng):
        cb = generate_grassmannian(12, 32, seed=1, iterations=50)
        masks = generate_masking(32, 12, seed=8)
        h = crandn(rng, 4)
        ids = [1, 2, 3, 30]
        ch = flat(layout, h, [1.0] * 4)
        plain = ls_estimate(map_pilots(empty_grid(layout, 1), layout, cb, MaskingTable.all_ones(32, 12), ids, ch),
                            layout, cb, MaskingTable.all_ones(32, 12), ids)
        masked = ls_estimate(map_pilots(empty_grid(layout, 1), layout, cb, masks, ids, ch), layout, cb, masks, ids)
        np.testing.assert_allclose(masked, plain, atol=1e-10)

    def test_noise_covariance(self, rng):
        # oracle: LS error covariance is sigma^2 (A^H A)^{-1}
        layout = build_layout("contiguous")
        cb = generate_grassmannian(12, 32, seed=1, iterations=50)
        ids = [0, 3, 11, 19, 25]
        masks = generate_masking(32, 12, seed=1)
        a = cb.signatures[:, ids]
        oracle = np.real(np.diag(np.linalg.inv(a.conj().T @ a))) * 0.5
        errs = []
        for _ in range(9):  # 9 x 100 antennas x 12 blocks > 10^4 estimates
            grid = np.sqrt(0.5) * crandn(rng, 72, 14, 100)
            errs.append(ls_estimate(grid, layout, cb, masks, ids).reshape(len(ids), -1))
        var = np.mean(np.abs(np.concatenate(errs, axis=1)) ** 2, axis=1)
        np.testing.assert_allclose(var, oracle, rtol=0.05)


class TestInterpolate:
    def test_constant(self, layout):
        anchors = np.full((2, 2, 12), 0.3 - 1j)
        np.testing.assert_allclose(interpolate(anchors, layout), 0.3 - 1j)

    @pytest.mark.parametrize("strategy", ["contiguous", "split"])
    def test_linear_reproduction(self, strategy):
        lay = build_layout(strategy)
        c = lay.pilot_anchors()
        f = lambda sc, sym: (1 + 2j) + 0.1 * sc - 0.3j * sc
        anchors = f(c[:, 0], c[:, 1])[None, None, :]
        grid = interpolate(anchors, lay)[0, :, :, 0]
        sc, sym = np.meshgrid(np.arange(72), np.arange(14), indexing="ij")
        np.testing.assert_allclose(grid, f(sc, sym), atol=1e-12)

    def test_bilinear_in_time(self, layout):
        c = layout.pilot_anchors()
        f = lambda sc, sym: 0.05 * sc + 0.2j * sym + 0.01 * sc * sym
        grid = interpolate(f(c[:, 0], c[:, 1])[None, None, :], layout)[0, :, :, 0]
        sc, sym = np.meshgrid(np.arange(72), np.arange(14), indexing="ij")
        np.testing.assert_allclose(grid, f(sc, sym), atol=1e-12)

    def test_anchor_lattices(self, layout):
        split = build_layout("split")
        assert (np.unique(layout.pilot_anchors()[:, 0]).size, np.unique(layout.pilot_anchors()[:, 1]).size) == (6, 2)
        assert (np.unique(split.pilot_anchors()[:, 0]).size, np.unique(split.pilot_anchors()[:, 1]).size) == (12, 1)

    def test_anchor_consistency(self, layout, rng):
        # on pilot symbols the grid must be the piecewise-linear curve through the anchors
        anchors = crandn(rng, 3, 2, 12)
        grid = interpolate(anchors, layout)
        c = layout.pilot_anchors()
        for sym in np.unique(c[:, 1]).astype(int):
            sel = c[:, 1] == sym
            oracle = interp1d(c[sel, 0], anchors[..., sel], axis=-1, fill_value="extrapolate")(np.arange(72))
            np.testing.assert_allclose(np.moveaxis(grid[:, :, sym, :], -1, 1), oracle, atol=1e-12)


def transmit(layout, pilot_cb, data_cb, masks, ids, ch, codec, rng):
    payloads = [random_payload(layout.num_data_blocks, codec, rng) for _ in ids]
    grid = map_pilots(empty_grid(layout, ch.gains.shape[-1]), layout, pilot_cb, masks, ids, ch)
    grid = map_data(grid, layout, data_cb, np.asarray(ids) % data_cb.size, ch,
                    np.stack([p.qam_symbols for p in payloads]))
    return grid, payloads


class TestMmsePic:
    def test_single_user_noiseless(self, layout, rng):
        codec = ConvolutionalCode("2/3")
        pilot_cb = generate_grassmannian(12, 32, seed=1, iterations=50)
        data_cb = generate_grassmannian(4, 16, seed=2, iterations=50)
        masks = MaskingTable.all_ones(32, 12)
        ch = flat(layout, [1.0], [1.0])
        grid, payloads = transmit(layout, pilot_cb, data_cb, masks, [6], ch, codec, rng)
        est = estimate_channels(grid, layout, pilot_cb, masks, [6])
        rx = mmse_pic_receive(grid, layout, [6], est.grid, data_cb, [6], 0.0, codec, 12)
        assert rx.iteration == {6: 1}
        np.testing.assert_array_equal(rx.decoded[6], payloads[0].info_bits)

    def test_orthonormal_four_users(self, layout, rng):
        codec = ConvolutionalCode("2/3")
        pilot_cb = Codebook(np.eye(12))
        data_cb = Codebook(np.fft.fft(np.eye(4)) / 2)
        masks = MaskingTable.all_ones(12, 12)
        ids = [0, 1, 2, 3]
        ch = flat(layout, crandn(rng, 4), [1.0, 2.0, 0.5, 3.0])
        grid, payloads = transmit(layout, pilot_cb, data_cb, masks, ids, ch, codec, rng)
        est = estimate_channels(grid, layout, pilot_cb, masks, ids)
        rx = mmse_pic_receive(grid, layout, ids, est.grid, data_cb, ids, 0.0, codec, 12)
        assert rx.iteration == {k: 1 for k in ids}
        for k, p in zip(ids, payloads):
            np.testing.assert_array_equal(rx.decoded[k], p.info_bits)

    def test_cancellation_removes_user(self, layout, rng):
        codec = ConvolutionalCode("2/3")
        data_cb = generate_grassmannian(4, 16, seed=2, iterations=50)
        ch = flat(layout, crandn(rng, 2), [2.0, 1.0])
        p = make_payload(rng.integers(0, 2, 264), codec)
        grid = map_data(empty_grid(layout, 1), layout, data_cb, [4], ChannelRealization(ch.gains[:1], ch.rx_power[:1]),
                        p.qam_symbols[None])
        true_h = np.sqrt(12 * ch.rx_power[0]) * ch.gains[:1]
        g = effective_columns(true_h, layout, data_cb, [4], 12)
        residual = extract_data_blocks(grid, layout).reshape(216, -1) - g[:, :, 0] * p.qam_symbols[:, None]
        assert np.max(np.abs(residual)) <= 1e-9

    def test_pic_needs_second_iteration_and_is_monotone(self, rng):
        # overloaded: 8 users on 4 data dimensions with one antenna
        layout = build_layout("contiguous")
        codec = ConvolutionalCode("2/3")
        pilot_cb = generate_grassmannian(12, 32, seed=1, iterations=200)
        data_cb = generate_grassmannian(4, 16, seed=2, iterations=200)
        masks = generate_masking(32, 12, seed=3)
        ids = list(range(0, 16, 2))
        powers = 100 * 10 ** (np.linspace(1.5, -0.5, 8))
        ch = flat(layout, crandn(rng, 8), powers)
        grid, payloads = transmit(layout, pilot_cb, data_cb, masks, ids, ch, codec, rng)
        grid = grid + crandn(rng, *grid.shape)
        true_h = np.sqrt(12 * powers)[:, None, None, None] * ch.gains
        rx = mmse_pic_receive(grid, layout, ids, true_h, data_cb, ids, 1.0, codec, 12)
        iters = [rx.iteration[k] for k in sorted(rx.iteration, key=rx.iteration.get)]
        assert iters == sorted(iters)
        assert max(iters) > 1
        for k, p in zip(ids, payloads):
            if k in rx.decoded:
                np.testing.assert_array_equal(rx.decoded[k], p.info_bits)

    def test_empty_detection(self, layout):
        rx = mmse_pic_receive(empty_grid(layout, 1), layout, [], np.zeros((0, 72, 14, 1)),
                              generate_grassmannian(4, 16, seed=2, iterations=10), [], 1.0,
                              ConvolutionalCode(), 12)
        assert rx.decoded == {}
