from specbill.parallel import max_workers, pmap


def test_order_preserved():
    assert pmap(lambda x: x * x, range(20), workers=4) == [x * x for x in range(20)]
    assert pmap(str, [], workers=3) == []


def test_env_cap(monkeypatch):
    monkeypatch.setenv("SPECBILL_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("SPECBILL_THREADS", "0")
    assert max_workers() == 1
    monkeypatch.setenv("SPECBILL_THREADS", "many")
    assert max_workers() >= 1
