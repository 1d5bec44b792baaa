# Reporting Package
from src.reporting.run_log import RunRecorder
from src.reporting.writers import read_csv, read_manifest_header, write_table

__all__ = ['RunRecorder', 'read_csv', 'read_manifest_header', 'write_table']
