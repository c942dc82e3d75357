# SPDX-License-Identifier: Apache-2.0
"""End-to-end smoke checks of the python surface."""

import math

import numpy as np

import streamst


def _samples(count, phase=0.0):
    return [math.sin(0.1 * i + phase) * 0.5 for i in range(count)]


def test_incremental_encoding_matches_one_shot_bitwise():
    model = streamst.Model.random(7)
    sps = model.cfg.samples_per_segment()
    samples = _samples(3 * sps)

    frames_full = streamst.extract_all(samples, model)
    states_full = streamst.encode_full(frames_full, model)

    stream = streamst.ExtractorStream(model)
    cache = streamst.EncoderCache()
    frames_inc = []
    states_inc = []
    for s in range(3):
        frames = stream.push_segment(samples[s * sps:(s + 1) * sps])
        frames_inc.append(frames)
        states_inc.append(streamst.encode_segment(cache, frames, model))

    assert cache.blocks_processed == 3
    assert np.array_equal(np.vstack(frames_inc), frames_full)
    assert np.array_equal(np.vstack(states_inc), states_full)

    emb = streamst.adapt(states_full, 0, model)
    assert emb.shape == (streamst.adapter_output_len(states_full.shape[0]), model.cfg.d_model)


def test_masks_and_positions():
    blockwise = streamst.build_blockwise_mask(4, 2)
    assert blockwise.tolist() == [
        [True, True, False, False],
        [True, True, False, False],
        [True, True, True, True],
        [True, True, True, True],
    ]

    consistency = streamst.build_consistency_mask([("speech", 1), ("text", 1), ("speech", 1)])
    assert consistency.tolist() == [
        [True, False, False],
        [True, True, False],
        [True, False, True],
    ]

    positions = streamst.assign_positions([("speech", 3), ("text", 2), ("speech", 3)])
    assert positions == [0, 1, 2, 0, 1, 3, 4, 5]


def test_wait_k_session_follows_the_schedule():
    model = streamst.Model.random(11)
    model.rig_constant_output(model.vocab.word_sep)
    sps = model.cfg.samples_per_segment()
    segments = [_samples(sps, phase=0.3 * s) for s in range(3)]

    policy = streamst.PolicyConfig(kind="wait_k", k=1, n=2)
    clock = streamst.Clock.simulated_uniform(0.0)
    result = streamst.run_wait_k_stride_n(model, segments, policy, clock)

    pattern = "".join("R" if e.type == "read" else "W" for e in result.log.events)
    assert pattern == "RWRWRW"
    assert result.log.events[1].tokens == [2, 2]
    for event in result.log.events:
        assert event.t_wall_ms == event.audio_ms


def test_latency_metric_from_a_session_log():
    model = streamst.Model.random(12)
    model.rig_constant_output(model.vocab.word_sep)
    sps = model.cfg.samples_per_segment()
    segments = [_samples(sps, phase=0.7 * s) for s in range(3)]

    policy = streamst.PolicyConfig(kind="wait_k", k=1, n=1, max_tokens_per_write=1)
    clock = streamst.Clock.simulated_uniform(0.0)
    result = streamst.run_wait_k_stride_n(model, segments, policy, clock)

    profile = streamst.delays_from_log(result.log, model.vocab)
    assert profile.d_nca == [1000.0, 2000.0, 3000.0]
    assert streamst.laal(profile, "nca") == 1000.0
    assert streamst.laal(profile, "ca") == 1000.0


def test_contrastive_loss_values():
    single = np.array([[0.3, 0.7]])
    assert streamst.waco_loss(single, single, 0.2) == 0.0

    pair = np.array([[1.0, 0.0], [0.0, 1.0]])
    expected = math.log(1.0 + math.exp(-5.0))
    assert abs(streamst.waco_loss(pair, pair, 0.2) - expected) < 1e-12
