/** Canonical JSON emission byte-compatible with the reference extractor. */

import { GraphStructure } from "./elaborate.js";

export const SCHEMA_VERSION = 1;

function doubleToExact(x: number): { m: bigint; e: number } {
  const view = new DataView(new ArrayBuffer(8));
  view.setFloat64(0, x);
  const bits = (BigInt(view.getUint32(0)) << 32n) | BigInt(view.getUint32(4));
  const expBits = Number((bits >> 52n) & 0x7ffn);
  const mantissa = bits & 0xfffffffffffffn;
  if (expBits === 0) return { m: mantissa, e: -1074 };
  return { m: mantissa | (1n << 52n), e: expBits - 1075 };
}

const POW10 = (k: number): bigint => 10n ** BigInt(k);

/** Correctly-rounded 6-significant-digit decimal of a positive double,
 * ties to even — the same result printf's %.6g produces. */
function sixDigits(x: number): { digits: string; exp10: number } {
  const { m, e } = doubleToExact(x);
  let num: bigint;
  let den: bigint;
  if (e >= 0) {
    num = m << BigInt(e);
    den = 1n;
  } else {
    num = m * 5n ** BigInt(-e);
    den = POW10(-e);
  }
  // decimal exponent: 10^exp10 <= num/den < 10^(exp10 + 1)
  let exp10 = String(num).length - String(den).length;
  const cmp = (k: number): number => {
    const lhs = k >= 0 ? num : num * POW10(-k);
    const rhs = k >= 0 ? den * POW10(k) : den;
    return lhs < rhs ? -1 : lhs === rhs ? 0 : 1;
  };
  if (cmp(exp10) < 0) exp10 -= 1;
  if (cmp(exp10 + 1) >= 0) exp10 += 1;

  const shift = 5 - exp10;
  if (shift >= 0) num *= POW10(shift);
  else den *= POW10(-shift);
  let q = num / den;
  const rem2 = (num % den) * 2n;
  if (rem2 > den || (rem2 === den && (q & 1n) === 1n)) q += 1n;
  if (q === 1000000n) {
    q = 100000n;
    exp10 += 1;
  }
  return { digits: q.toString(), exp10 };
}

/** Format like %.6g with a decimal marker kept on fixed-form integers. */
export function canonicalFloat(x: number): string {
  if (x === 0) return "0.0";
  const sign = x < 0 ? "-" : "";
  const { digits, exp10 } = sixDigits(Math.abs(x));
  if (exp10 < -4 || exp10 >= 6) {
    const rest = digits.slice(1).replace(/0+$/, "");
    const mantissa = rest === "" ? digits[0] : `${digits[0]}.${rest}`;
    const expStr = (exp10 < 0 ? "-" : "+")
      + String(Math.abs(exp10)).padStart(2, "0");
    return `${sign}${mantissa}e${expStr}`;
  }
  let body: string;
  if (exp10 >= 0) {
    const intPart = digits.slice(0, exp10 + 1);
    const frac = digits.slice(exp10 + 1).replace(/0+$/, "");
    body = frac === "" ? `${intPart}.0` : `${intPart}.${frac}`;
  } else {
    const frac = ("0".repeat(-exp10 - 1) + digits).replace(/0+$/, "");
    body = `0.${frac}`;
  }
  return sign + body;
}

export function round6g(x: number): number {
  return Number(canonicalFloat(x));
}

// width_norm values repeat across thousands of edges; the exact BigInt
// formatting is too slow to run per edge
const floatMemo = new Map<number, string>();

function canonicalFloatCached(x: number): string {
  let s = floatMemo.get(x);
  if (s === undefined) {
    s = canonicalFloat(x);
    floatMemo.set(x, s);
  }
  return s;
}

export function serializeGraph(
  structure: GraphStructure,
  sourceSha256: string,
  wMax: number,
): string {
  // identifiers, hex digests and decimal strings never contain characters
  // that need JSON escaping, so strings are quoted directly
  const parts: string[] = [
    `{"schema_version":${SCHEMA_VERSION},"module_name":"${structure.moduleName}"`,
    `,"source_sha256":"${sourceSha256}","nodes":[`,
  ];
  for (let i = 0; i < structure.nodes.length; i += 1) {
    const n = structure.nodes[i];
    const io = n.ioType === null ? "null" : `"${n.ioType}"`;
    let ports = "";
    for (let j = 0; j < n.portNames.length; j += 1) {
      ports += (j > 0 ? ',"' : '"') + n.portNames[j] + '"';
    }
    let params = "";
    for (let j = 0; j < n.params.length; j += 1) {
      const [key, value] = n.params[j];
      params += `${j > 0 ? "," : ""}["${key}","${value}"]`;
    }
    parts.push(
      `${i > 0 ? "," : ""}{"id":${n.id},"kind":"${n.kind}",` +
      `"op_type":"${n.opType}","io_type":${io},` +
      `"port_names":[${ports}],"params":[${params}]}`);
  }
  parts.push('],"edges":[');
  for (let i = 0; i < structure.edges.length; i += 1) {
    const e = structure.edges[i];
    parts.push(
      `${i > 0 ? "," : ""}{"src":${e.src},"dst":${e.dst},` +
      `"width":${e.width},` +
      `"width_norm":${canonicalFloatCached(e.width / wMax)}}`);
  }
  parts.push("]}");
  return parts.join("");
}
