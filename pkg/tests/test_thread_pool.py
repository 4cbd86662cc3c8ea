from app.services.common.thread_pool import ThreadPoolService


def test_map_ordered_keeps_input_order():
    pool = ThreadPoolService(max_workers=3)
    try:
        assert pool.map_ordered(lambda value: value * value, range(10)) == [value * value for value in range(10)]
    finally:
        pool.shutdown()


def test_nested_map_runs_inline_on_workers():
    pool = ThreadPoolService(max_workers=2)

    def outer(value):
        assert pool.in_worker()
        return sum(pool.map_ordered(lambda inner: inner + value, range(4)))

    try:
        assert not pool.in_worker()
        assert pool.map_ordered(outer, range(6)) == [6 + 4 * value for value in range(6)]
        assert not pool.in_worker()
    finally:
        pool.shutdown()


def test_single_worker_runs_serially():
    pool = ThreadPoolService(max_workers=1)
    assert pool.map_ordered(str, [1, 2]) == ["1", "2"]
    assert pool.executor is None
