/** Optimistic label editing.
 *
 * A toggle flips the chip immediately, then sends the add-or-remove; the
 * acknowledged server label set is re-applied (server is the source of
 * truth), and on failure the chip reverts and the error is surfaced.
 * Mutations are serialized per post so rapid toggles cannot reorder.
 */

import { ApiRequestError, NetworkError } from "./api.js";
import type { Session } from "./session.js";

export interface ToggleResult {
  ok: boolean;
  /** chip state after the call settled */
  on: boolean;
  message?: string;
}

const postQueues = new WeakMap<Session, Map<string, Promise<unknown>>>();

function serialized<T>(
  session: Session,
  postId: string,
  task: () => Promise<T>,
): Promise<T> {
  let queues = postQueues.get(session);
  if (!queues) {
    queues = new Map();
    postQueues.set(session, queues);
  }
  const tail = queues.get(postId) ?? Promise.resolve();
  const next = tail.then(task, task);
  queues.set(postId, next);
  return next;
}

export function toggleLabel(
  session: Session,
  postId: string,
  labelId: string,
): Promise<ToggleResult> {
  // the catalog is the only source of label ids; refuse anything else
  // before a request is even formed
  if (!session.knownLabel(labelId)) {
    return Promise.resolve({
      ok: false,
      on: false,
      message: `unknown label ${labelId}`,
    });
  }
  return serialized(session, postId, async () => {
    const chip = session.chip(postId, labelId);
    if (!chip) return { ok: false, on: false, message: "post not on this page" };
    const wasOn = chip.on;
    chip.on = !wasOn; // optimistic
    const add = wasOn ? [] : [labelId];
    const remove = wasOn ? [labelId] : [];
    try {
      const ack = await session.client.putLabels(
        postId,
        session.annotator,
        add,
        remove,
      );
      session.applyServerLabels(postId, ack.labels);
      return { ok: true, on: ack.labels.includes(labelId) };
    } catch (err) {
      chip.on = wasOn; // rollback
      if (err instanceof NetworkError) {
        session.unsynced.push({ postId, add, remove });
        return { ok: false, on: wasOn, message: "offline; edit queued" };
      }
      if (err instanceof ApiRequestError) {
        return { ok: false, on: wasOn, message: `${err.code}: ${err.message}` };
      }
      throw err;
    }
  });
}

/** Explicit "reviewed, no labels apply": writes an empty edit so the post
 * leaves the pending queue. */
export function markReviewed(
  session: Session,
  postId: string,
): Promise<ToggleResult> {
  return serialized(session, postId, async () => {
    try {
      const ack = await session.client.putLabels(
        postId,
        session.annotator,
        [],
        [],
      );
      session.applyServerLabels(postId, ack.labels);
      return { ok: true, on: false };
    } catch (err) {
      if (err instanceof NetworkError) {
        session.unsynced.push({ postId, add: [], remove: [] });
        return { ok: false, on: false, message: "offline; edit queued" };
      }
      if (err instanceof ApiRequestError) {
        return { ok: false, on: false, message: `${err.code}: ${err.message}` };
      }
      throw err;
    }
  });
}

/** Re-send queued offline edits in order; stops at the first failure. */
export async function flushUnsynced(session: Session): Promise<number> {
  let flushed = 0;
  while (session.unsynced.length > 0) {
    const mutation = session.unsynced[0]!;
    try {
      const ack = await session.client.putLabels(
        mutation.postId,
        session.annotator,
        mutation.add,
        mutation.remove,
      );
      session.applyServerLabels(mutation.postId, ack.labels);
      session.unsynced.shift();
      flushed += 1;
    } catch {
      break;
    }
  }
  return flushed;
}
