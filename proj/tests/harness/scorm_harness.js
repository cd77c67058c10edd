// Drives an emitted quiz script against a recording SCORM 1.2 API stub.
//
// usage: node scorm_harness.js <config.json>
// config: {"script": "<path>", "key": [..], "choices": [..]}
// Every right/wrong pattern over the questions is submitted once in a fresh
// sandbox. Prints a JSON summary; exits 1 on any mismatch.
"use strict";

const fs = require("fs");
const vm = require("vm");

function expectedScore(correct, total) {
  // Half-up rounding of 100 * correct / total in integer arithmetic.
  return Math.floor((200 * correct + total) / (2 * total));
}

function makeApi(calls) {
  const record = (name) => (...args) => {
    calls.push([name, ...args]);
    return "true";
  };
  return {
    LMSInitialize: record("LMSInitialize"),
    LMSSetValue: record("LMSSetValue"),
    LMSGetValue: record("LMSGetValue"),
    LMSCommit: record("LMSCommit"),
    LMSFinish: record("LMSFinish"),
    LMSGetLastError: () => "0",
    LMSGetErrorString: () => "",
    LMSGetDiagnostic: () => "",
  };
}

function makeDocument(chosen, choices) {
  const handlers = {};
  const result = { textContent: "" };
  const button = {
    addEventListener: (type, fn) => {
      (handlers[type] = handlers[type] || []).push(fn);
    },
  };
  return {
    handlers,
    result,
    doc: {
      getElementsByName: (name) => {
        const i = Number(name.slice(1));
        const out = [];
        for (let k = 0; k < (choices[i] || 0); k += 1) {
          out.push({ value: String(k), checked: chosen[i] === k });
        }
        return out;
      },
      getElementById: (id) => (id === "submit" ? button : id === "result" ? result : null),
    },
  };
}

// placement: "self" puts the API on the page window, "parent" on its
// parent frame, "opener" on the opening window, anything else nowhere.
function run(source, chosen, choices, placement, clicks) {
  const calls = [];
  const api = makeApi(calls);
  const page = makeDocument(chosen, choices);
  const win = {};
  if (placement === "self") {
    win.API = api;
  } else if (placement === "parent") {
    win.parent = { API: api };
  } else if (placement === "opener") {
    win.parent = win;
    win.opener = { API: api };
  }
  const context = { window: win, document: page.doc, String, parseInt, Math };
  vm.createContext(context);
  vm.runInContext(source, context, { timeout: 1000 });
  for (let c = 0; c < clicks; c += 1) {
    (page.handlers.click || []).forEach((fn) => fn());
  }
  return { calls, result: page.result.textContent, quiz: win.curatorQuiz };
}

function sameCalls(actual, expected) {
  return JSON.stringify(actual) === JSON.stringify(expected);
}

function main() {
  const config = JSON.parse(fs.readFileSync(process.argv[2], "utf8"));
  const source = fs.readFileSync(config.script, "utf8");
  const key = config.key;
  const choices = config.choices;
  const n = key.length;
  const failures = [];
  let patterns = 0;

  for (let mask = 0; mask < 1 << n; mask += 1) {
    patterns += 1;
    const chosen = [];
    let correct = 0;
    for (let i = 0; i < n; i += 1) {
      if (mask & (1 << i)) {
        chosen.push(key[i]);
        correct += 1;
      } else if (mask % 3 === 0 && i === 0) {
        chosen.push(-1); // unanswered counts as wrong
      } else {
        chosen.push((key[i] + 1) % choices[i]);
      }
    }
    const s = expectedScore(correct, n);
    const placement = ["self", "parent", "opener"][mask % 3];
    const { calls, result } = run(source, chosen, choices, placement, mask % 2 ? 2 : 1);
    const expected = [
      ["LMSInitialize", ""],
      ["LMSSetValue", "cmi.core.score.raw", String(s)],
      ["LMSSetValue", "cmi.core.lesson_status", "completed"],
      ["LMSCommit", ""],
      ["LMSFinish", ""],
    ];
    if (!sameCalls(calls, expected) || result !== "Score: " + s + "%") {
      failures.push({ mask, placement, expected, calls, result });
    }
  }

  // Without any API the quiz still scores locally and makes no calls.
  const orphan = run(source, key.slice(), choices, "none", 1);
  if (orphan.result !== "Score: 100%") failures.push({ case: "no-api", result: orphan.result });

  console.log(JSON.stringify({ questions: n, patterns, failures: failures.slice(0, 5), failed: failures.length }));
  process.exit(failures.length === 0 ? 0 : 1);
}

main();
