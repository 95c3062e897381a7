from .defect import DefectField, defect, dense_defect, layer_exit_time
from .slopes import fit_slope, theorem_check
from .sweep import SweepRunner, build_report, error_sweep, separation_failures, snapshot_times, validate_eps
from .report_writer import ReportWriter, dump_json, emit_report, write_manifest_json
