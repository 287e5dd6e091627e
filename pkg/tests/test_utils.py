import pytest

from oemde.utils import (
    atomic_write_text,
    cell_dir_name,
    derive_seed,
    normalize_seed,
    parse_cell_dir,
)


def test_parse_cell_dir():
    match = parse_cell_dir('rastrigin_conditioned_D30')
    assert match == {'function': 'rastrigin_conditioned', 'dim': '30'}


@pytest.mark.parametrize('name', ['sphere', 'sphere_D', 'sphere_Dx', ''])
def test_parse_cell_dir_rejects(name):
    assert parse_cell_dir(name) is None


def test_cell_dir_name_parses_back():
    assert parse_cell_dir(cell_dir_name('schwefel_1_2', 10)) == {
        'function': 'schwefel_1_2',
        'dim': '10',
    }


def test_derive_seed_is_stable():
    seed = derive_seed(0, 'OEMDE', 'sphere', 10, 3)
    assert seed == derive_seed(0, 'OEMDE', 'sphere', 10, 3)
    assert 0 <= seed < 2 ** 64


def test_derive_seed_separates_cells():
    seeds = {
        derive_seed(0, variant, 'sphere', d, t)
        for variant in ('OEMDE', 'MDE')
        for d in (10, 30)
        for t in range(30)
    }
    assert len(seeds) == 2 * 2 * 30
    assert derive_seed(1, 'OEMDE') != derive_seed(0, 'OEMDE')


def test_normalize_seed():
    assert normalize_seed(-1) == 2 ** 64 - 1
    assert normalize_seed(42) == 42


def test_atomic_write_text(tmp_path):
    path = atomic_write_text(tmp_path / 'a' / 'b.csv', 'x±y\n')
    assert path.read_text(encoding='utf-8') == 'x±y\n'
    atomic_write_text(path, 'second\n')
    assert path.read_text(encoding='utf-8') == 'second\n'
    # no temp files left behind
    assert [p.name for p in path.parent.iterdir()] == ['b.csv']
