/** Minimal CSV handling for the simulator's metrics files. */

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: no header row");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(`row ${i + 1} has ${cells.length} cells, expected ${columns.length}`);
    }
    return cells;
  });
  return { columns, rows };
}

export function numericColumn(table: Table, name: string, source = "csv"): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${source}: missing column "${name}" (has: ${table.columns.join(", ")})`);
  }
  return table.rows.map((row, i) => {
    const value = Number(row[idx]);
    if (Number.isNaN(value)) {
      throw new SchemaError(`${source}: row ${i + 1}, column "${name}" is not numeric: ${row[idx]}`);
    }
    return value;
  });
}
