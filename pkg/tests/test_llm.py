import json
import threading

import pytest

from causalboard import llm, prompts


def specs_10():
    return prompts.debate_battery("cylinders", "displacement",
                                  "automotive engineering")


def counting_transport(responses=None, fail_keys=()):
    """Fake transport; counts calls and answers from a prompt->text map."""
    calls = {"n": 0}
    lock = threading.Lock()

    def transport(cfg, messages):
        with lock:
            calls["n"] += 1
        prompt = "\n".join(m["content"] for m in messages)
        if responses is not None:
            for needle, text in responses.items():
                if needle in prompt:
                    return text, {"total_tokens": 1}
        return f"Rating: 3\nCanned answer for: {prompt[:40]}", {}

    return transport, calls


def record_config(tmp_path, **kw):
    return llm.LlmConfig(mode="record", fixtures_dir=str(tmp_path / "fx"), **kw)


@pytest.fixture(autouse=True)
def fake_credential(monkeypatch):
    monkeypatch.setenv("OPENAI_API_KEY", "test-key-not-real")


def test_config_validation(monkeypatch, tmp_path):
    with pytest.raises(llm.LlmError, match="fixtures"):
        llm.LlmConfig(mode="replay").validate()
    monkeypatch.delenv("OPENAI_API_KEY")
    with pytest.raises(llm.LlmError, match="environment"):
        llm.LlmConfig(mode="live").validate()
    with pytest.raises(llm.LlmError, match="mode"):
        llm.LlmConfig(mode="dream").validate()
    llm.LlmConfig(mode="replay", fixtures_dir=str(tmp_path)).validate()


def test_replay_returns_fixture_byte_identically(tmp_path):
    spec = specs_10()[0]
    response = "Rating: 4\nBecause engines."
    key = llm.write_fixture(tmp_path, spec.rendered, response)
    gw = llm.LlmGateway(
        llm.LlmConfig(mode="replay", fixtures_dir=str(tmp_path)))
    ex = gw.complete(spec)
    assert ex.response == response
    assert ex.key == key


def test_replay_missing_fixture_raises_with_key(tmp_path):
    spec = specs_10()[0]
    gw = llm.LlmGateway(
        llm.LlmConfig(mode="replay", fixtures_dir=str(tmp_path)))
    with pytest.raises(llm.MissingFixture) as exc:
        gw.complete(spec)
    assert exc.value.key == llm.exchange_key("gpt-4", 0.0, spec.rendered)


def test_record_then_replay_round_trip(tmp_path):
    spec = specs_10()[0]
    transport, calls = counting_transport()
    rec = llm.LlmGateway(record_config(tmp_path), transport=transport)
    recorded = rec.complete(spec)
    assert calls["n"] == 1

    replay = llm.LlmGateway(
        llm.LlmConfig(mode="replay", fixtures_dir=str(tmp_path / "fx")))
    replayed = replay.complete(spec)
    assert replayed.response == recorded.response
    assert replayed.key == recorded.key


def test_cache_hit_makes_zero_network_calls(tmp_path):
    spec = specs_10()[0]
    transport, calls = counting_transport()
    gw = llm.LlmGateway(record_config(tmp_path), transport=transport)
    gw.complete(spec)
    gw.complete(spec)
    gw.complete(spec)
    assert calls["n"] == 1
    assert gw.network_calls == 1


def test_fixtures_immutable_once_written(tmp_path):
    spec = specs_10()[0]
    fx = tmp_path / "fx"
    transport, _ = counting_transport()
    gw = llm.LlmGateway(record_config(tmp_path), transport=transport)
    ex = gw.complete(spec)
    path = fx / f"{ex.key}.json"
    original = path.read_text(encoding="utf-8")
    # tamper the response and re-record: the file must not be overwritten
    transport2, _ = counting_transport(
        responses={"cylinders": "Rating: 1\nDifferent now."})
    gw2 = llm.LlmGateway(record_config(tmp_path), transport=transport2)
    ex2 = gw2.complete(spec)
    assert path.read_text(encoding="utf-8") == original
    assert ex2.response == ex.response  # fixture consulted before transport


def test_battery_results_in_spec_order_any_parallelism(tmp_path):
    specs = specs_10()
    for spec in specs:
        llm.write_fixture(tmp_path, spec.rendered,
                          f"Rating: 2\nAnswer {spec.key[:8]}")
    outputs = []
    for parallel in (1, 8):
        gw = llm.LlmGateway(llm.LlmConfig(
            mode="replay", fixtures_dir=str(tmp_path), max_parallel=parallel))
        items = gw.run_battery(specs)
        assert [i.spec.key for i in items] == [s.key for s in specs]
        assert all(i.error is None for i in items)
        outputs.append([i.exchange.response for i in items])
    assert outputs[0] == outputs[1]


def test_battery_partial_failure_keeps_successes(tmp_path):
    specs = specs_10()
    for spec in specs[:-1]:  # one fixture deliberately missing
        llm.write_fixture(tmp_path, spec.rendered, "Rating: 2\nOk.")
    gw = llm.LlmGateway(
        llm.LlmConfig(mode="replay", fixtures_dir=str(tmp_path)))
    items = gw.run_battery(specs)
    assert sum(1 for i in items if i.exchange is not None) == 9
    failed = [i for i in items if i.error is not None]
    assert len(failed) == 1
    assert failed[0].spec.key == specs[-1].key
    assert "fixture" in failed[0].error


def test_battery_total_failure_raises(tmp_path):
    specs = specs_10()[:3]
    gw = llm.LlmGateway(
        llm.LlmConfig(mode="replay", fixtures_dir=str(tmp_path)))
    with pytest.raises(llm.BatteryError):
        gw.run_battery(specs)


def test_exchange_key_depends_on_model_and_temperature():
    k1 = llm.exchange_key("gpt-4", 0.0, "hello")
    k2 = llm.exchange_key("gpt-4", 0.7, "hello")
    k3 = llm.exchange_key("gpt-5", 0.0, "hello")
    assert len({k1, k2, k3}) == 3
    assert k1 == llm.exchange_key("gpt-4", 0.0, "hello")


def test_split_messages_persona_system():
    spec = specs_10()[0]
    messages = llm.split_messages(spec.rendered)
    assert messages[0]["role"] == "system"
    assert messages[0]["content"] == "You are an expert in automotive engineering."
    assert messages[1]["role"] == "user"
    assert "cause" in messages[1]["content"]
    bare = llm.split_messages("no persona here")
    assert bare == [{"role": "user", "content": "no persona here"}]


def test_fixture_file_format(tmp_path):
    spec = specs_10()[0]
    key = llm.write_fixture(tmp_path, spec.rendered, "Rating: 4\nText.")
    doc = json.loads((tmp_path / f"{key}.json").read_text(encoding="utf-8"))
    assert set(doc) >= {"prompt", "response", "model", "temperature"}
    assert doc["model"] == "gpt-4"
    assert doc["temperature"] == 0.0
