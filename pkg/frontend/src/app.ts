/**
 * Minimal action store: hold the state, reduce actions one at a
 * time, tell listeners afterwards.  Listeners render; they never
 * dispatch synchronously, which keeps the action order equal to the
 * arrival order and therefore reproducible.
 */

import type { Action, HmiState, OperatorMode } from "./state.js";
import { initialState, reduce } from "./state.js";

export interface Store {
  getState(): HmiState;
  dispatch(action: Action): void;
  subscribe(listener: (state: HmiState) => void): () => void;
}

export function createStore(mode: OperatorMode = "operator"): Store {
  let state = initialState(mode);
  const listeners = new Set<(state: HmiState) => void>();
  return {
    getState: () => state,
    dispatch: (action) => {
      state = reduce(state, action);
      for (const listener of listeners) {
        listener(state);
      }
    },
    subscribe: (listener) => {
      listeners.add(listener);
      return () => listeners.delete(listener);
    },
  };
}
