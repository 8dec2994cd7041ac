"""
CSV persistence of solver iteration traces.
"""
import csv

BASE_COLUMNS = ['iter', 'R_P', 'R_D', 'Error', 'objective', 'elapsed']


def _fmt(value):
    return repr(float(value))


def write_trace(path, trace):
    """One row per iteration; optional columns appear when recorded."""
    columns = list(BASE_COLUMNS)
    extra = []
    if trace and trace[0].ref_error is not None:
        extra.append(('ref_error', 'ref_error'))
    if trace and trace[0].delta_hat_norm is not None:
        extra += [('delta_hat', 'delta_hat_norm'), ('delta', 'delta_norm')]
    columns += [name for name, _ in extra]
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(columns)
        for rec in trace:
            row = [rec.iteration, _fmt(rec.r_p), _fmt(rec.r_d),
                   _fmt(rec.error), _fmt(rec.objective), _fmt(rec.elapsed)]
            row += [_fmt(getattr(rec, attr)) for _, attr in extra]
            writer.writerow(row)


def read_trace(path):
    """Rows of a trace file as dicts of floats (iter as int)."""
    with open(path, newline='') as fh:
        rows = []
        for row in csv.DictReader(fh):
            rec = {key: float(value) for key, value in row.items()}
            rec['iter'] = int(rec['iter'])
            rows.append(rec)
    return rows
