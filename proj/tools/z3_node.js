#!/usr/bin/env node
// Thin adapter so the external-solver backend can use the z3-solver npm
// package (Z3 compiled to WASM): evaluate one SMT-LIB2 file and print the
// raw solver output (sat/unsat/unknown plus any model).
//
// Usage: node z3_node.js query.smt2

const fs = require('fs');

function loadZ3() {
  try {
    return require('z3-solver');
  } catch (e) {
    // Fall back to the global install location when NODE_PATH is not set.
    return require('/usr/lib/node_modules/z3-solver');
  }
}

async function main() {
  const file = process.argv[2];
  if (!file) {
    console.error('usage: node z3_node.js <query.smt2>');
    process.exit(2);
  }
  const text = fs.readFileSync(file, 'utf8');
  const { init } = loadZ3();
  const { Z3 } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  Z3.del_config(cfg);
  const out = await Z3.eval_smtlib2_string(ctx, text);
  process.stdout.write(out.endsWith('\n') ? out : out + '\n');
  // The WASM runtime keeps pthread workers alive; exit explicitly once the
  // answer is flushed.
  process.exit(0);
}

main().catch((e) => {
  console.error(String(e && e.stack ? e.stack : e));
  process.exit(1);
});
