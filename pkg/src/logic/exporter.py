"""
Excel Exporter Module

Writes cohesion reports to Excel workbooks: a "Cohesion" sheet in the
version comparison layout and a "Modules" sheet with per-module counts.
"""

from typing import Dict, List, Optional, Sequence

from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

from ..models.report import CohesionReport, ModuleCohesion
from ..utils.logging_utils import get_logger
from .metrics import round_display

logger = get_logger(__name__)


class ExcelExporter:
    """
    Exporter for writing cohesion reports to Excel files.

    Numeric cells hold the display-rounded values as numbers with a 0.00
    number format; absent indices are written as "-".
    """

    def __init__(self, header_fill_color: str = "#E0E0E0", decimals: int = 2):
        """
        Initialize the Excel exporter.

        Args:
            header_fill_color: Hex color for header rows
            decimals: Display precision of index cells
        """
        self.decimals = decimals
        self.workbook = None

        self.black_border = Border(
            left=Side(style='thin', color='000000'),
            right=Side(style='thin', color='000000'),
            top=Side(style='thin', color='000000'),
            bottom=Side(style='thin', color='000000')
        )
        color = header_fill_color.lstrip('#')
        self.header_fill = PatternFill(start_color=color, end_color=color, fill_type="solid")
        self.white_fill = PatternFill(start_color="FFFFFF", end_color="FFFFFF", fill_type="solid")
        self.bold_font = Font(name="Arial", size=10, bold=True)
        self.normal_font = Font(name="Arial", size=10, bold=False)

    def export_reports(self, reports: Sequence[CohesionReport], output_path: str,
                       breakdowns: Optional[Dict[str, List[ModuleCohesion]]] = None) -> bool:
        """
        Export reports (and optional per-module breakdowns) to an Excel file.

        Args:
            reports: Reports to write, one row each
            output_path: Path where the workbook should be saved
            breakdowns: Optional mapping version label -> module breakdown

        Returns:
            True if export was successful, False otherwise
        """
        try:
            self.workbook = Workbook()
            sheet = self.workbook.active
            sheet.title = "Cohesion"
            self._write_header(sheet, ["Version", "CoI(J)", "CoI(AJ)", "Average"])
            for row_idx, report in enumerate(reports, 2):
                values = [report.version_label, report.coi_classes, report.coi_aspects, report.combined]
                for col_idx, value in enumerate(values, 1):
                    self._write_value(sheet, row_idx, col_idx, value, is_label=col_idx == 1)
            self._auto_fit_columns(sheet)

            if breakdowns:
                modules_sheet = self.workbook.create_sheet("Modules")
                self._write_header(modules_sheet, ["Version", "Module", "Kind", "f", "1/f"])
                row_idx = 2
                for label, rows in breakdowns.items():
                    for module in rows:
                        values = [label, module.name, module.kind, module.functionality_count, module.cohesion]
                        for col_idx, value in enumerate(values, 1):
                            self._write_value(modules_sheet, row_idx, col_idx, value, is_label=col_idx <= 4)
                        row_idx += 1
                self._auto_fit_columns(modules_sheet)

            self.workbook.save(output_path)
            logger.info("exported %d cohesion reports to %s", len(reports), output_path)
            return True

        except Exception as e:
            logger.error("error exporting cohesion reports: %s", e)
            return False

    def _write_header(self, sheet, headers: List[str]):
        """
        Write a bold, filled header row.

        Args:
            sheet: Target worksheet
            headers: Column titles
        """
        for col_idx, title in enumerate(headers, 1):
            cell = sheet.cell(row=1, column=col_idx, value=title)
            cell.font = self.bold_font
            cell.fill = self.header_fill
            cell.border = self.black_border
            cell.alignment = Alignment(horizontal='center', vertical='center')

    def _write_value(self, sheet, row: int, column: int, value, is_label: bool = False):
        """
        Write one body cell with borders and alignment.

        Args:
            sheet: Target worksheet
            row: 1-based row
            column: 1-based column
            value: Label, integer, index value or None
            is_label: Whether the cell holds text or a count rather than an index
        """
        if is_label:
            cell = sheet.cell(row=row, column=column, value=value)
        elif value is None:
            cell = sheet.cell(row=row, column=column, value="-")
        else:
            rounded = float(round_display(value, self.decimals))
            cell = sheet.cell(row=row, column=column, value=rounded)
            cell.number_format = "0." + "0" * self.decimals
        cell.border = self.black_border
        cell.font = self.normal_font
        cell.fill = self.white_fill
        horizontal = 'left' if column == 1 else 'center'
        cell.alignment = Alignment(horizontal=horizontal, vertical='center')

    def _auto_fit_columns(self, sheet):
        """
        Auto-fit column widths based on content.
        """
        for col_idx, column in enumerate(sheet.columns, 1):
            max_length = 0
            for cell in column:
                if cell.value is not None:
                    max_length = max(max_length, len(str(cell.value)))
            # minimum 10, maximum 50
            sheet.column_dimensions[get_column_letter(col_idx)].width = min(max(max_length + 2, 10), 50)


def export_reports_xlsx(reports: Sequence[CohesionReport], output_path: str,
                        breakdowns: Optional[Dict[str, List[ModuleCohesion]]] = None) -> bool:
    """
    Export reports to an Excel workbook with default styling.

    Args:
        reports: Reports to write
        output_path: Destination ``.xlsx`` path
        breakdowns: Optional mapping version label -> module breakdown

    Returns:
        True on success
    """
    return ExcelExporter().export_reports(reports, output_path, breakdowns)
