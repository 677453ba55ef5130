import main


def write_scene(tmp_path):
    path = tmp_path / 'escena.toml'
    path.write_text('[scene]\nwidth = 32\nheight = 32\nsigma = 4.0\nv0 = [1.0, 0.0]\nframe_count = 3\n',
                    encoding='utf-8')
    return path


def test_help(capsys):
    assert main.main(['help']) == 0
    assert 'benchmark' in capsys.readouterr().out


def test_synth_then_benchmark(tmp_path):
    scene = write_scene(tmp_path)
    assert main.main(['synth', str(scene), str(tmp_path / 'data'), '--flow-dir', str(tmp_path / 'flows')]) == 0
    assert (tmp_path / 'data' / '000' / '00000008.png').exists()

    code = main.main(['benchmark', str(tmp_path / 'data'), '--flow-source', 'files',
                      '--flow-dir', str(tmp_path / 'flows'), '--output-dir', str(tmp_path / 'out'),
                      '--hole-fill', 'nearest-valid', '--omega', '4'])
    assert code == 0
    assert (tmp_path / 'out' / 'reports' / 'benchmark_x4_quadratic.csv').exists()


def test_flow_estimate_and_convert(tmp_path):
    scene = write_scene(tmp_path)
    main.main(['synth', str(scene), str(tmp_path / 'data'), '--stride', '2'])
    frames = tmp_path / 'data' / '000'
    flo = tmp_path / 'f.flo'
    assert main.main(['flow', 'estimate', str(frames / '00000000.png'), str(frames / '00000002.png'), str(flo),
                      '--pyramid-levels', '2']) == 0
    assert main.main(['flow', 'convert', str(flo), str(tmp_path / 'f.png')]) == 0
    assert (tmp_path / 'f.png').exists()


def test_errors_exit_with_one(tmp_path, capsys):
    assert main.main(['interpolate', str(tmp_path / 'no-existe'), str(tmp_path / 'out')]) == 1
    assert '❌' in capsys.readouterr().out
    assert main.main(['flow']) == 1
